//! Law reports produced by every sampled check.

use serde::{Deserialize, Serialize};

/// One failing sampled instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub objects: Vec<String>,
    pub morphisms: Vec<String>,
    pub lhs: String,
    pub rhs: String,
    pub delta: f64,
}

impl Violation {
    pub fn new(objects: Vec<String>, morphisms: Vec<String>, lhs: impl Into<String>, rhs: impl Into<String>, delta: f64) -> Self {
        Violation { objects, morphisms, lhs: lhs.into(), rhs: rhs.into(), delta: finite(delta) }
    }
}

/// Outcome of checking one law over a sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: String,
    pub instances_checked: usize,
    pub violations: Vec<Violation>,
    #[serde(skip, default)]
    pub max_delta: f64,
    #[serde(skip, default)]
    pub warnings: Vec<String>,
    #[serde(skip, default)]
    pub not_applicable: Option<String>,
}

fn finite(x: f64) -> f64 {
    if x.is_nan() || x.is_infinite() {
        f64::MAX
    } else {
        x
    }
}

impl LawReport {
    pub fn new(law: impl Into<String>) -> Self {
        LawReport { law: law.into(), instances_checked: 0, violations: Vec::new(), max_delta: 0.0, warnings: Vec::new(), not_applicable: None }
    }

    pub fn not_applicable(law: impl Into<String>, reason: impl Into<String>) -> Self {
        let mut r = LawReport::new(law);
        r.not_applicable = Some(reason.into());
        r
    }

    /// Record one instance with its defect; `describe` is only called on failure.
    pub fn record<F>(&mut self, delta: f64, tol: f64, describe: F)
    where
        F: FnOnce() -> (Vec<String>, Vec<String>, String, String),
    {
        self.instances_checked += 1;
        let d = finite(delta.abs());
        if d > self.max_delta {
            self.max_delta = d;
        }
        if !(d <= tol) {
            let (objects, morphisms, lhs, rhs) = describe();
            self.violations.push(Violation::new(objects, morphisms, lhs, rhs, d));
        }
    }

    /// Record a boolean instance (delta 0 on success).
    pub fn record_bool<F>(&mut self, ok: bool, describe: F)
    where
        F: FnOnce() -> (Vec<String>, Vec<String>, String, String),
    {
        self.record(if ok { 0.0 } else { f64::MAX }, 0.0, describe);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Fold another report into this one, keeping instance order.
    pub fn absorb(&mut self, other: LawReport) {
        self.instances_checked += other.instances_checked;
        self.max_delta = self.max_delta.max(other.max_delta);
        self.violations.extend(other.violations);
        self.warnings.extend(other.warnings);
        if self.not_applicable.is_none() {
            self.not_applicable = other.not_applicable;
        }
    }

    pub fn merged(law: impl Into<String>, parts: impl IntoIterator<Item = LawReport>) -> LawReport {
        let mut r = LawReport::new(law);
        let mut all_na = true;
        let mut any = false;
        for p in parts {
            any = true;
            if p.not_applicable.is_none() {
                all_na = false;
            }
            let na = p.not_applicable.clone();
            r.instances_checked += p.instances_checked;
            r.max_delta = r.max_delta.max(p.max_delta);
            r.violations.extend(p.violations);
            r.warnings.extend(p.warnings);
            if let Some(reason) = na {
                r.warnings.push(format!("{}: not applicable ({})", p.law, reason));
            }
        }
        if any && all_na {
            r.not_applicable = Some("all parts not applicable".into());
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("law report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_tracks_max_and_violations() {
        let mut r = LawReport::new("demo");
        r.record(1e-14, 1e-12, || unreachable!());
        r.record(1e-3, 1e-12, || (vec!["x".into()], vec!["g".into()], "1".into(), "2".into()));
        assert_eq!(r.instances_checked, 2);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.max_delta, 1e-3);
        assert!(!r.passed());
    }

    #[test]
    fn nan_delta_is_a_violation_and_serializes() {
        let mut r = LawReport::new("nan");
        r.record(f64::NAN, 1.0, || (vec![], vec![], String::new(), String::new()));
        assert_eq!(r.violations.len(), 1);
        let js = r.to_json();
        let back: LawReport = serde_json::from_str(&js).unwrap();
        assert_eq!(back.violations[0].delta, f64::MAX);
        assert!(js.contains("\"instances_checked\": 1"));
    }
}
