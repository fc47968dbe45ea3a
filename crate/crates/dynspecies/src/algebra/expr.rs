//! Closed-form function descriptors and point maps.
//!
//! Pullbacks `f∘θ` stay symbolic, so iterated pullbacks along flows are
//! evaluated by nested point-map application instead of interpolation.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type Point = Vec<f64>;

type PointFn = Arc<dyn Fn(&[f64]) -> Point + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A map between coordinate spaces.
#[derive(Clone)]
pub enum PointMap {
    Identity(usize),
    Affine { a: DMatrix<f64>, b: DVector<f64> },
    Custom { name: String, f: PointFn },
    /// `outer ∘ inner`
    Compose(Arc<PointMap>, Arc<PointMap>),
}

impl fmt::Debug for PointMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl PointMap {
    pub fn translation(v: &[f64]) -> Self {
        PointMap::Affine { a: DMatrix::identity(v.len(), v.len()), b: DVector::from_column_slice(v) }
    }

    pub fn affine(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        PointMap::Affine { a, b }
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(&[f64]) -> Point + Send + Sync + 'static) -> Self {
        PointMap::Custom { name: name.into(), f: Arc::new(f) }
    }

    pub fn apply(&self, p: &[f64]) -> Point {
        match self {
            PointMap::Identity(_) => p.to_vec(),
            PointMap::Affine { a, b } => {
                let v = a * DVector::from_column_slice(p) + b;
                v.iter().copied().collect()
            }
            PointMap::Custom { f, .. } => f(p),
            PointMap::Compose(outer, inner) => outer.apply(&inner.apply(p)),
        }
    }

    /// `self ∘ inner`
    pub fn after(&self, inner: &PointMap) -> PointMap {
        match (self, inner) {
            (PointMap::Identity(_), m) | (m, PointMap::Identity(_)) => m.clone(),
            _ => PointMap::Compose(Arc::new(self.clone()), Arc::new(inner.clone())),
        }
    }

    pub fn inverse(&self) -> Option<PointMap> {
        match self {
            PointMap::Identity(n) => Some(PointMap::Identity(*n)),
            PointMap::Affine { a, b } => {
                let ai = a.clone().try_inverse()?;
                let bi = -(&ai * b);
                Some(PointMap::Affine { a: ai, b: bi })
            }
            PointMap::Compose(outer, inner) => Some(inner.inverse()?.after(&outer.inverse()?)),
            PointMap::Custom { .. } => None,
        }
    }

    /// Linear part when the map is affine.
    pub fn linear_part(&self) -> Option<DMatrix<f64>> {
        match self {
            PointMap::Identity(n) => Some(DMatrix::identity(*n, *n)),
            PointMap::Affine { a, .. } => Some(a.clone()),
            PointMap::Compose(o, i) => Some(o.linear_part()? * i.linear_part()?),
            PointMap::Custom { .. } => None,
        }
    }

    /// Jacobian at `p`: exact for affine maps, central differences otherwise.
    pub fn jacobian(&self, p: &[f64], h: f64) -> DMatrix<f64> {
        if let Some(a) = self.linear_part() {
            return a;
        }
        let n = p.len();
        let m = self.apply(p).len();
        let mut j = DMatrix::zeros(m, n);
        for k in 0..n {
            let mut pp = p.to_vec();
            let mut pm = p.to_vec();
            pp[k] += h;
            pm[k] -= h;
            let (fp, fm) = (self.apply(&pp), self.apply(&pm));
            for i in 0..m {
                j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        j
    }

    pub fn describe(&self) -> String {
        match self {
            PointMap::Identity(_) => "id".into(),
            PointMap::Affine { a, b } => {
                if a == &DMatrix::identity(a.nrows(), a.ncols()) {
                    format!("translate{:?}", b.as_slice())
                } else {
                    format!("affine(A={:?}, b={:?})", a.as_slice(), b.as_slice())
                }
            }
            PointMap::Custom { name, .. } => name.clone(),
            PointMap::Compose(o, i) => format!("{}∘{}", o.describe(), i.describe()),
        }
    }
}

/// Expression tree for a complex-valued function on coordinate space.
#[derive(Clone)]
pub enum FnExpr {
    Const(Complex64),
    Coord(usize),
    /// `exp(-|x - c|² / w²)`
    Bump { center: Point, width: f64 },
    Add(Arc<FnExpr>, Arc<FnExpr>),
    Mul(Arc<FnExpr>, Arc<FnExpr>),
    Scale(Complex64, Arc<FnExpr>),
    Conj(Arc<FnExpr>),
    /// `f ∘ θ`
    Pullback(Arc<FnExpr>, PointMap),
    Custom { name: String, f: ScalarFn },
}

impl fmt::Debug for FnExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl FnExpr {
    pub fn eval(&self, p: &[f64]) -> Complex64 {
        match self {
            FnExpr::Const(c) => *c,
            FnExpr::Coord(k) => Complex64::new(p[*k], 0.0),
            FnExpr::Bump { center, width } => {
                let r2: f64 = p.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
                Complex64::new((-r2 / (width * width)).exp(), 0.0)
            }
            FnExpr::Add(a, b) => a.eval(p) + b.eval(p),
            FnExpr::Mul(a, b) => a.eval(p) * b.eval(p),
            FnExpr::Scale(c, a) => c * a.eval(p),
            FnExpr::Conj(a) => a.eval(p).conj(),
            FnExpr::Pullback(a, m) => a.eval(&m.apply(p)),
            FnExpr::Custom { f, .. } => f(p),
        }
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        FnExpr::Custom { name: name.into(), f: Arc::new(f) }
    }

    pub fn describe(&self) -> String {
        match self {
            FnExpr::Const(c) => {
                if c.im == 0.0 {
                    format!("{}", c.re)
                } else {
                    format!("({}+{}i)", c.re, c.im)
                }
            }
            FnExpr::Coord(k) => format!("x{k}"),
            FnExpr::Bump { center, width } => format!("bump({center:?},{width})"),
            FnExpr::Add(a, b) => format!("({} + {})", a.describe(), b.describe()),
            FnExpr::Mul(a, b) => format!("{}·{}", a.describe(), b.describe()),
            FnExpr::Scale(c, a) => format!("{}·{}", FnExpr::Const(*c).describe(), a.describe()),
            FnExpr::Conj(a) => format!("conj({})", a.describe()),
            FnExpr::Pullback(a, m) => format!("{}∘[{}]", a.describe(), m.describe()),
            FnExpr::Custom { name, .. } => name.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_inverse_roundtrip() {
        let m = PointMap::affine(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]), DVector::from_vec(vec![1.0, -3.0]));
        let inv = m.inverse().unwrap();
        let p = vec![0.3, 0.7];
        let q = inv.apply(&m.apply(&p));
        assert!((q[0] - p[0]).abs() < 1e-15 && (q[1] - p[1]).abs() < 1e-15);
    }

    #[test]
    fn nested_pullback_evaluates_inner_map_first() {
        let f = Arc::new(FnExpr::Coord(0));
        let g = FnExpr::Pullback(Arc::new(FnExpr::Pullback(f, PointMap::translation(&[1.0]))), PointMap::custom("double", |p| vec![2.0 * p[0]]));
        // (x0 ∘ (+1)) ∘ (×2) at 3 = 2·3 + 1
        assert_eq!(g.eval(&[3.0]).re, 7.0);
    }
}
