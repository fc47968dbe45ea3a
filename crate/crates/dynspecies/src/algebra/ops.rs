//! Operational quantities: propensities, interference, spectral measures.

use serde::Serialize;

use super::element::{hermitian_spectrum, AlgebraElement, StarAlgebra};
use super::functional::Functional;
use super::maps::{Channel, PositiveMap};
use crate::error::{Error, Result};

/// Default tolerance for the effect test inside [`propensity`].
pub const EFFECT_TOL: f64 = 1e-10;

/// `J(ω)(e) / ω(1)`.
pub fn propensity(j: &Channel, omega: &Functional, e: &AlgebraElement) -> Result<f64> {
    let s = omega.strength();
    if !(s > 0.0) {
        return Err(Error::ZeroStrength);
    }
    if !j.target.is_effect(e, EFFECT_TOL) {
        return Err(Error::Precondition(format!("{} is not an effect of {}", e.describe(), j.target.label())));
    }
    Ok(j.apply(omega)?.apply(e)?.re / s)
}

pub fn is_effect(alg: &StarAlgebra, a: &AlgebraElement, tol: f64) -> bool {
    alg.is_effect(a, tol)
}

/// `δ(a): b ↦ a* b a`.
pub fn delta(alg: &StarAlgebra, a: &AlgebraElement) -> PositiveMap {
    PositiveMap::delta(alg, a)
}

#[derive(Debug, Clone, Serialize)]
pub struct Interference {
    /// Propensity through `c(a+b)`.
    pub lhs: f64,
    /// Propensities through `ca` and `cb`.
    pub parts: [f64; 2],
    pub rhs_sum: f64,
    /// `ω(Int(a,b,c)) / ω(1)`.
    pub defect: f64,
    pub precondition_failures: Vec<String>,
}

impl Interference {
    /// `|lhs − (rhs_sum + defect)|`.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs_sum - self.defect).abs()
    }
}

/// Two-path interference with `Int(a,b,c) = a*c*cb + b*c*ca`, all three
/// propensities taken through `δ(x)†` with the unit effect.
pub fn interference_check(alg: &StarAlgebra, a: &AlgebraElement, b: &AlgebraElement, cc: &AlgebraElement, omega: &Functional) -> Result<Interference> {
    let s = omega.strength();
    if !(s > 0.0) {
        return Err(Error::ZeroStrength);
    }
    let ab = a.add(b)?;
    let ca = cc.mul(a)?;
    let cb = cc.mul(b)?;
    let cab = cc.mul(&ab)?;
    let mut failures = Vec::new();
    for (name, x) in [("a", a), ("b", b), ("a+b", &ab), ("ca", &ca), ("cb", &cb), ("c(a+b)", &cab)] {
        if !alg.in_unit_ball(x, 1e-12) {
            failures.push(format!("{name} is outside the unit ball"));
        }
    }
    let through = |x: &AlgebraElement| -> Result<f64> { Ok(omega.apply(&x.square_norm())?.re / s) };
    let lhs = through(&cab)?;
    let parts = [through(&ca)?, through(&cb)?];
    let int = a.adjoint().mul(&cc.adjoint())?.mul(&cb)?.add(&b.adjoint().mul(&cc.adjoint())?.mul(&ca)?)?;
    let defect = omega.apply(&int)?.re / s;
    Ok(Interference { lhs, parts, rhs_sum: parts[0] + parts[1], defect, precondition_failures: failures })
}

/// Pairs `(λ, ν_λ)` with `ν_λ = ω(P_λ)` for the spectral projections of `O`.
/// Eigenvalues closer than `1e-9` are merged.
pub fn spectral_measure(alg: &StarAlgebra, omega: &Functional, o: &AlgebraElement) -> Result<Vec<(f64, f64)>> {
    let m = match (alg.mat_dim(), o) {
        (Some(_), AlgebraElement::Mat(m)) => m,
        _ => return Err(Error::UnsupportedVariant("spectral measures need a matrix algebra".into())),
    };
    if !alg.is_self_adjoint(o, 1e-10) {
        return Err(Error::Precondition("observable must be self-adjoint".into()));
    }
    let groups = hermitian_spectrum(m, 1e-9);
    groups
        .into_iter()
        .map(|(l, p)| Ok((l, omega.apply(&AlgebraElement::Mat(p))?.re)))
        .collect()
}

/// `ω(O) / ω(1)`.
pub fn mean_value(omega: &Functional, o: &AlgebraElement) -> Result<f64> {
    let s = omega.strength();
    if !(s > 0.0) {
        return Err(Error::ZeroStrength);
    }
    Ok(omega.apply(o)?.re / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::element::{c, CMat};
    use crate::algebra::maps::dagger;

    fn m2() -> StarAlgebra {
        StarAlgebra::matrix_algebra("M2", 2, 1e-12).unwrap()
    }

    #[test]
    fn propensity_through_projection() {
        let a = m2();
        let rho = Functional::density(CMat::identity(2, 2) * c(0.5, 0.0)).unwrap();
        let j = dagger(&delta(&a, &AlgebraElement::real_diag(&[1.0, 0.0])));
        assert!((propensity(&j, &rho, &a.unit()).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(propensity(&j, &rho, &a.unit().scale(c(2.0, 0.0))), Err(Error::Precondition(_))));
        assert!(matches!(propensity(&j, &rho.scaled(0.0), &a.unit()), Err(Error::ZeroStrength)));
    }

    #[test]
    fn spectral_measure_of_diagonal() {
        let a = m2();
        let rho = Functional::density(CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.25, 0.0), c(0.75, 0.0)]))).unwrap();
        let o = AlgebraElement::real_diag(&[2.0, -1.0]);
        let mu = spectral_measure(&a, &rho, &o).unwrap();
        assert_eq!(mu.len(), 2);
        assert!((mu[0].0 + 1.0).abs() < 1e-12 && (mu[0].1 - 0.75).abs() < 1e-12);
        assert!((mu[1].0 - 2.0).abs() < 1e-12 && (mu[1].1 - 0.25).abs() < 1e-12);
        assert!((mean_value(&rho, &o).unwrap() + 0.25).abs() < 1e-12);
        let unit = spectral_measure(&a, &rho, &a.unit()).unwrap();
        assert_eq!(unit.len(), 1);
    }
}
