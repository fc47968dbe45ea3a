//! Positive functionals.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::element::{block_eigenvalues, c, hermitian_eigenvalues, AlgebraElement, CMat, StarAlgebra};
use super::expr::Point;
use super::maps::PositiveMap;
use crate::category::CatMorphism;
use crate::error::{Error, Result};

/// Smallest eigenvalue accepted for a density at construction.
pub const PSD_FLOOR: f64 = -1e-10;

#[derive(Clone)]
pub enum Functional {
    /// `Σ wᵢ δ_{pᵢ}` with `wᵢ ≥ 0`.
    DiracMix(Vec<(Point, f64)>),
    /// `a ↦ tr(ρ a)` with `ρ` positive semidefinite.
    Mat(CMat),
    /// `φ∘T`, kept unevaluated.
    Pulled { base: Box<Functional>, map: PositiveMap },
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// JSON literal for a Dirac atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiracAtom {
    pub point: Vec<f64>,
    pub weight: f64,
}

impl Functional {
    pub fn dirac(p: Point) -> Self {
        Functional::DiracMix(vec![(p, 1.0)])
    }

    pub fn dirac_mix(atoms: Vec<(Point, f64)>) -> Result<Self> {
        if let Some((_, w)) = atoms.iter().find(|(_, w)| !(*w >= 0.0)) {
            return Err(Error::Precondition(format!("negative Dirac weight {w}")));
        }
        Ok(Functional::DiracMix(atoms))
    }

    pub fn from_atoms(atoms: &[DiracAtom]) -> Result<Self> {
        Self::dirac_mix(atoms.iter().map(|a| (a.point.clone(), a.weight)).collect())
    }

    /// Density functional; rejects matrices with an eigenvalue below `PSD_FLOOR`.
    pub fn density(rho: CMat) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::Precondition("density must be square".into()));
        }
        if (&rho - rho.adjoint()).iter().any(|z| z.norm() > 1e-10) {
            return Err(Error::Precondition("density must be Hermitian".into()));
        }
        let m = hermitian_eigenvalues(&rho).into_iter().fold(f64::INFINITY, f64::min);
        if m < PSD_FLOOR {
            return Err(Error::NotPositive(m));
        }
        Ok(Functional::Mat(rho))
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<Complex64> {
        match (self, a) {
            (Functional::DiracMix(atoms), AlgebraElement::Fn(e)) => Ok(atoms.iter().map(|(p, w)| e.eval(p) * *w).sum()),
            (Functional::Mat(rho), AlgebraElement::Mat(m)) if rho.shape() == m.shape() => {
                let mut s = c(0.0, 0.0);
                for i in 0..rho.nrows() {
                    for j in 0..rho.ncols() {
                        s += rho[(i, j)] * m[(j, i)];
                    }
                }
                Ok(s)
            }
            (Functional::Pulled { base, map }, _) => base.apply(&map.apply(a)?),
            _ => Err(Error::VariantMismatch(format!("functional {} applied to {}", self.describe(), a.describe()))),
        }
    }

    /// `φ(1)`.
    pub fn strength(&self) -> f64 {
        match self {
            Functional::DiracMix(atoms) => atoms.iter().map(|(_, w)| w).sum(),
            Functional::Mat(rho) => rho.trace().re,
            Functional::Pulled { base, map } => base.apply(&map.apply(&map.source().unit()).expect("unit maps")).map(|z| z.re).unwrap_or(f64::NAN),
        }
    }

    pub fn scaled(&self, s: f64) -> Functional {
        match self {
            Functional::DiracMix(atoms) => Functional::DiracMix(atoms.iter().map(|(p, w)| (p.clone(), w * s)).collect()),
            Functional::Mat(rho) => Functional::Mat(rho * c(s, 0.0)),
            Functional::Pulled { base, map } => Functional::Pulled { base: Box::new(base.scaled(s)), map: map.clone() },
        }
    }

    /// Max `|φ(b) − χ(b)|` over the algebra's test basis.
    pub fn distance(&self, other: &Functional, alg: &StarAlgebra) -> f64 {
        alg.test_basis()
            .iter()
            .map(|b| match (self.apply(b), other.apply(b)) {
                (Ok(x), Ok(y)) => (x - y).norm(),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Positivity on `alg`: nonnegative weights supported in the region
    /// (Dirac), PSD block-compatible density (Mat), or `φ(b*b) ≥ 0` on the
    /// basis for unevaluated pullbacks.
    pub fn is_positive_on(&self, alg: &StarAlgebra, tol: f64) -> bool {
        match self {
            Functional::DiracMix(atoms) => atoms.iter().all(|(p, w)| {
                *w >= -tol && (alg.domain().map(|d| d.contains(p, tol)).unwrap_or(true)) && alg.is_fn() && p.len() == alg.probes()[0].len()
            }),
            Functional::Mat(rho) => match alg.mat_dim() {
                Some((d, block)) => rho.nrows() == d && (rho - rho.adjoint()).iter().all(|z| z.norm() <= tol) && block_eigenvalues(rho, block).iter().all(|l| *l >= -tol),
                None => false,
            },
            Functional::Pulled { .. } => alg.test_basis().iter().all(|b| match self.apply(&b.square_norm()) {
                Ok(v) => v.re >= -tol && v.im.abs() <= tol,
                Err(_) => false,
            }),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Functional::DiracMix(atoms) => {
                let parts: Vec<String> = atoms.iter().map(|(p, w)| format!("{w}·δ{p:?}")).collect();
                parts.join(" + ")
            }
            Functional::Mat(rho) => format!("tr(ρ·), ρ = {}", AlgebraElement::Mat(rho.clone()).describe()),
            Functional::Pulled { base, map } => format!("({})∘{}", base.describe(), map.label()),
        }
    }
}
