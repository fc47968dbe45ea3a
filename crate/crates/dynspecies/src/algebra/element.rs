//! Unital *-algebras of the two represented families and their elements.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expr::{FnExpr, Point};
use super::functional::Functional;
use crate::category::CatObject;
use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone)]
pub enum AlgebraElement {
    Fn(Arc<FnExpr>),
    Mat(CMat),
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl AlgebraElement {
    pub fn func(e: FnExpr) -> Self {
        AlgebraElement::Fn(Arc::new(e))
    }

    pub fn mat(m: CMat) -> Self {
        AlgebraElement::Mat(m)
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let v: Vec<Complex64> = entries.iter().map(|x| c(*x, 0.0)).collect();
        AlgebraElement::Mat(CMat::from_diagonal(&nalgebra::DVector::from_vec(v)))
    }

    fn mismatch(op: &str) -> Error {
        Error::VariantMismatch(format!("{op} mixes function and matrix elements"))
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        match (self, other) {
            (AlgebraElement::Fn(a), AlgebraElement::Fn(b)) => Ok(AlgebraElement::Fn(Arc::new(FnExpr::Add(a.clone(), b.clone())))),
            (AlgebraElement::Mat(a), AlgebraElement::Mat(b)) if a.shape() == b.shape() => Ok(AlgebraElement::Mat(a + b)),
            (AlgebraElement::Mat(_), AlgebraElement::Mat(_)) => Err(Error::VariantMismatch("matrix sizes differ".into())),
            _ => Err(Self::mismatch("add")),
        }
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        match (self, other) {
            (AlgebraElement::Fn(a), AlgebraElement::Fn(b)) => Ok(AlgebraElement::Fn(Arc::new(FnExpr::Mul(a.clone(), b.clone())))),
            (AlgebraElement::Mat(a), AlgebraElement::Mat(b)) if a.ncols() == b.nrows() => Ok(AlgebraElement::Mat(a * b)),
            (AlgebraElement::Mat(_), AlgebraElement::Mat(_)) => Err(Error::VariantMismatch("matrix sizes differ".into())),
            _ => Err(Self::mismatch("mul")),
        }
    }

    pub fn scale(&self, s: Complex64) -> AlgebraElement {
        match self {
            AlgebraElement::Fn(a) => AlgebraElement::Fn(Arc::new(FnExpr::Scale(s, a.clone()))),
            AlgebraElement::Mat(a) => AlgebraElement::Mat(a * s),
        }
    }

    pub fn adjoint(&self) -> AlgebraElement {
        match self {
            AlgebraElement::Fn(a) => AlgebraElement::Fn(Arc::new(FnExpr::Conj(a.clone()))),
            AlgebraElement::Mat(a) => AlgebraElement::Mat(a.adjoint()),
        }
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    /// `a* a`
    pub fn square_norm(&self) -> AlgebraElement {
        self.adjoint().mul(self).expect("a* a is always defined")
    }

    pub fn eval(&self, p: &[f64]) -> Result<Complex64> {
        match self {
            AlgebraElement::Fn(a) => Ok(a.eval(p)),
            AlgebraElement::Mat(_) => Err(Error::UnsupportedVariant("point evaluation of a matrix".into())),
        }
    }

    pub fn as_mat(&self) -> Option<&CMat> {
        match self {
            AlgebraElement::Mat(m) => Some(m),
            AlgebraElement::Fn(_) => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            AlgebraElement::Fn(e) => e.describe(),
            AlgebraElement::Mat(m) => {
                let rows: Vec<String> = (0..m.nrows())
                    .map(|i| {
                        let cells: Vec<String> = (0..m.ncols()).map(|j| fmt_c(m[(i, j)])).collect();
                        cells.join(" ")
                    })
                    .collect();
                format!("[{}]", rows.join("; "))
            }
        }
    }
}

fn fmt_c(z: Complex64) -> String {
    if z.im.abs() < 1e-15 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.lo.len() && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| *x >= l - tol && *x <= h + tol)
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
    }

    pub fn center(&self) -> Point {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }
}

#[derive(Debug, Clone)]
pub enum AlgebraKind {
    /// Functions on a region, compared on probe points.
    Fn { dim: usize, probes: Vec<Point>, domain: Option<BoxDomain> },
    /// `d × d` complex matrices, or the block-diagonal subalgebra with blocks of size `block`.
    Mat { d: usize, block: usize },
}

struct AlgebraData {
    label: String,
    kind: AlgebraKind,
    eq_tol: f64,
    basis: Vec<AlgebraElement>,
    functionals: Vec<Functional>,
}

/// A finite-scale stand-in for a topological unital *-algebra.
#[derive(Clone)]
pub struct StarAlgebra {
    inner: Arc<AlgebraData>,
}

impl fmt::Debug for StarAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StarAlgebra({})", self.inner.label)
    }
}

impl CatObject for StarAlgebra {
    fn id(&self) -> String {
        self.inner.label.clone()
    }
}

fn label_seed(label: &str) -> u64 {
    // FNV-1a, stable across runs
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl StarAlgebra {
    pub fn function_algebra(label: impl Into<String>, dim: usize, probes: Vec<Point>, domain: Option<BoxDomain>, eq_tol: f64) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::Precondition("function algebra needs a nonempty probe set".into()));
        }
        if probes.iter().any(|p| p.len() != dim) {
            return Err(Error::Precondition("probe dimension mismatch".into()));
        }
        let label = label.into();
        let kind = AlgebraKind::Fn { dim, probes, domain };
        let basis = fn_basis(&kind);
        let functionals = fn_functionals(&kind);
        Ok(StarAlgebra { inner: Arc::new(AlgebraData { label, kind, eq_tol, basis, functionals }) })
    }

    pub fn matrix_algebra(label: impl Into<String>, d: usize, eq_tol: f64) -> Result<Self> {
        Self::block_algebra(label, d, d, eq_tol)
    }

    /// Block-diagonal matrices with `d / block` blocks of size `block`.
    pub fn block_algebra(label: impl Into<String>, d: usize, block: usize, eq_tol: f64) -> Result<Self> {
        if d == 0 || block == 0 || d % block != 0 {
            return Err(Error::Precondition(format!("block size {block} must divide d = {d} ≥ 1")));
        }
        let label = label.into();
        let kind = AlgebraKind::Mat { d, block };
        let basis = mat_basis(d, block);
        let functionals = mat_functionals(d, block, label_seed(&label));
        Ok(StarAlgebra { inner: Arc::new(AlgebraData { label, kind, eq_tol, basis, functionals }) })
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }
    pub fn kind(&self) -> &AlgebraKind {
        &self.inner.kind
    }
    pub fn eq_tol(&self) -> f64 {
        self.inner.eq_tol
    }
    pub fn is_fn(&self) -> bool {
        matches!(self.inner.kind, AlgebraKind::Fn { .. })
    }
    pub fn same(&self, other: &StarAlgebra) -> bool {
        self.inner.label == other.inner.label
    }

    pub fn probes(&self) -> &[Point] {
        match &self.inner.kind {
            AlgebraKind::Fn { probes, .. } => probes,
            AlgebraKind::Mat { .. } => &[],
        }
    }

    pub fn domain(&self) -> Option<&BoxDomain> {
        match &self.inner.kind {
            AlgebraKind::Fn { domain, .. } => domain.as_ref(),
            AlgebraKind::Mat { .. } => None,
        }
    }

    pub fn mat_dim(&self) -> Option<(usize, usize)> {
        match &self.inner.kind {
            AlgebraKind::Mat { d, block } => Some((*d, *block)),
            AlgebraKind::Fn { .. } => None,
        }
    }

    pub fn unit(&self) -> AlgebraElement {
        match &self.inner.kind {
            AlgebraKind::Fn { .. } => AlgebraElement::func(FnExpr::Const(c(1.0, 0.0))),
            AlgebraKind::Mat { d, .. } => AlgebraElement::Mat(CMat::identity(*d, *d)),
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        match &self.inner.kind {
            AlgebraKind::Fn { .. } => AlgebraElement::func(FnExpr::Const(c(0.0, 0.0))),
            AlgebraKind::Mat { d, .. } => AlgebraElement::Mat(CMat::zeros(*d, *d)),
        }
    }

    /// Whether `a` has the right variant and shape for this algebra.
    pub fn accepts(&self, a: &AlgebraElement) -> bool {
        match (&self.inner.kind, a) {
            (AlgebraKind::Fn { .. }, AlgebraElement::Fn(_)) => true,
            (AlgebraKind::Mat { d, block }, AlgebraElement::Mat(m)) => {
                m.nrows() == *d && m.ncols() == *d && off_block_norm(m, *block) <= self.inner.eq_tol.max(1e-12)
            }
            _ => false,
        }
    }

    /// Max modulus difference on probes (Fn) or max entry difference (Mat).
    pub fn distance(&self, a: &AlgebraElement, b: &AlgebraElement) -> f64 {
        match (&self.inner.kind, a, b) {
            (AlgebraKind::Fn { probes, .. }, AlgebraElement::Fn(x), AlgebraElement::Fn(y)) => {
                probes.iter().map(|p| (x.eval(p) - y.eval(p)).norm()).fold(0.0, f64::max)
            }
            (AlgebraKind::Mat { .. }, AlgebraElement::Mat(x), AlgebraElement::Mat(y)) if x.shape() == y.shape() => {
                (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
            _ => f64::INFINITY,
        }
    }

    pub fn equal(&self, a: &AlgebraElement, b: &AlgebraElement) -> bool {
        self.distance(a, b) <= self.inner.eq_tol
    }

    pub fn is_self_adjoint(&self, a: &AlgebraElement, tol: f64) -> bool {
        self.distance(a, &a.adjoint()) <= tol
    }

    /// Membership in the positive cone: PSD (Mat) or pointwise nonnegative on probes (Fn).
    pub fn is_positive(&self, a: &AlgebraElement, tol: f64) -> bool {
        match (&self.inner.kind, a) {
            (AlgebraKind::Fn { probes, .. }, AlgebraElement::Fn(x)) => probes.iter().all(|p| {
                let v = x.eval(p);
                v.re >= -tol && v.im.abs() <= tol
            }),
            (AlgebraKind::Mat { block, .. }, AlgebraElement::Mat(m)) => {
                if (m - m.adjoint()).iter().any(|z| z.norm() > tol) {
                    return false;
                }
                block_eigenvalues(m, *block).into_iter().all(|l| l >= -tol)
            }
            _ => false,
        }
    }

    /// `0 ≤ a ≤ 1`.
    pub fn is_effect(&self, a: &AlgebraElement, tol: f64) -> bool {
        match (&self.inner.kind, a) {
            (AlgebraKind::Fn { probes, .. }, AlgebraElement::Fn(x)) => probes.iter().all(|p| {
                let v = x.eval(p);
                v.re >= -tol && v.re <= 1.0 + tol && v.im.abs() <= tol
            }),
            (AlgebraKind::Mat { block, .. }, AlgebraElement::Mat(m)) => {
                if (m - m.adjoint()).iter().any(|z| z.norm() > tol) {
                    return false;
                }
                let ev = block_eigenvalues(m, *block);
                ev.iter().all(|l| *l >= -tol && *l <= 1.0 + tol)
            }
            _ => false,
        }
    }

    /// `a* a ≤ 1`.
    pub fn in_unit_ball(&self, a: &AlgebraElement, tol: f64) -> bool {
        let aa = a.square_norm();
        match (&self.inner.kind, &aa) {
            (AlgebraKind::Mat { block, .. }, AlgebraElement::Mat(m)) => block_eigenvalues(m, *block).iter().all(|l| *l <= 1.0 + tol),
            (AlgebraKind::Fn { probes, .. }, AlgebraElement::Fn(x)) => probes.iter().all(|p| x.eval(p).re <= 1.0 + tol),
            _ => false,
        }
    }

    /// Generating family used to compare maps: matrix units inside the
    /// diagonal blocks (Mat), or constants, coordinates, bumps and a complex
    /// combination (Fn).
    pub fn test_basis(&self) -> &[AlgebraElement] {
        &self.inner.basis
    }

    /// Seeded family of positive functionals used as this algebra's sampler.
    pub fn sample_functionals(&self) -> &[Functional] {
        &self.inner.functionals
    }

    /// Self-adjoint elements used as observables in trajectory checks.
    pub fn sample_observables(&self) -> Vec<AlgebraElement> {
        self.inner
            .basis
            .iter()
            .map(|b| b.add(&b.adjoint()).expect("same variant").scale(c(0.5, 0.0)))
            .collect()
    }
}

fn off_block_norm(m: &CMat, block: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i / block != j / block {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// JSON matrix literal: rows of `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixLiteral(pub Vec<Vec<[f64; 2]>>);

impl MatrixLiteral {
    pub fn to_cmat(&self) -> Result<CMat> {
        let n = self.0.len();
        let cols = self.0.first().map(|r| r.len()).unwrap_or(0);
        if n == 0 || cols == 0 || self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Config("matrix literal must be a nonempty rectangle of [re, im] entries".into()));
        }
        Ok(CMat::from_fn(n, cols, |i, j| c(self.0[i][j][0], self.0[i][j][1])))
    }

    pub fn from_cmat(m: &CMat) -> Self {
        MatrixLiteral((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }
}

/// The hermitian part `A + iB` of `m` as the real symmetric matrix
/// `[[A, −B], [B, A]]`. Its spectrum is that of `m` with every eigenvalue
/// doubled; nalgebra's complex hermitian solver is unreliable on
/// degenerate spectra, the real one is not.
fn real_embedding(m: &CMat) -> DMatrix<f64> {
    let d = m.nrows();
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = h[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Eigenvalues of the hermitian part of `m`, ascending, with multiplicity.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = real_embedding(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

/// Distinct eigenvalues of the hermitian part of `m` (merged within `tol`)
/// with their spectral projections, read off the null space of `H − λ`.
pub fn hermitian_spectrum(m: &CMat, tol: f64) -> Vec<(f64, CMat)> {
    let d = m.nrows();
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for lam in hermitian_eigenvalues(m) {
        match groups.last_mut() {
            Some((l, n)) if (lam - *l / *n as f64).abs() <= tol => {
                *l += lam;
                *n += 1;
            }
            _ => groups.push((lam, 1)),
        }
    }
    groups
        .into_iter()
        .map(|(l, n)| {
            let lam = l / n as f64;
            let shifted = &h - CMat::identity(d, d) * c(lam, 0.0);
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.expect("requested");
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
            let mut p = CMat::zeros(d, d);
            for &i in order.iter().take(n) {
                let v = v_t.row(i).adjoint();
                p += &v * v.adjoint();
            }
            (lam, p)
        })
        .collect()
}

/// Eigenvalues of the hermitian part, block by block when `m` has no
/// entries off its diagonal blocks.
pub fn block_eigenvalues(m: &CMat, block: usize) -> Vec<f64> {
    if block >= m.nrows() || off_block_norm(m, block) > 0.0 {
        return hermitian_eigenvalues(m);
    }
    (0..m.nrows())
        .step_by(block)
        .flat_map(|i| hermitian_eigenvalues(&m.view((i, i), (block, block)).into_owned()))
        .collect()
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

fn mat_basis(d: usize, block: usize) -> Vec<AlgebraElement> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i / block == j / block {
                let mut m = CMat::zeros(d, d);
                m[(i, j)] = c(1.0, 0.0);
                out.push(AlgebraElement::Mat(m));
            }
        }
    }
    out
}

/// Random PSD matrix restricted to the diagonal blocks.
pub fn random_density(d: usize, block: usize, rng: &mut ChaCha8Rng, strength: f64) -> CMat {
    let mut g = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if i / block == j / block {
                g[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho * c(strength / tr, 0.0)
}

fn mat_functionals(d: usize, block: usize, seed: u64) -> Vec<Functional> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    out.push(Functional::Mat(CMat::identity(d, d) * c(1.0 / d as f64, 0.0)));
    let mut e0 = CMat::zeros(d, d);
    e0[(0, 0)] = c(1.0, 0.0);
    out.push(Functional::Mat(e0));
    if d > 1 {
        let mut last = CMat::zeros(d, d);
        last[(d - 1, d - 1)] = c(2.0, 0.0);
        out.push(Functional::Mat(last));
    }
    for k in 0..4 {
        let strength = [1.0, 0.5, 2.0, 1.0][k];
        out.push(Functional::Mat(random_density(d, block, &mut rng, strength)));
    }
    out
}

fn fn_basis(kind: &AlgebraKind) -> Vec<AlgebraElement> {
    let AlgebraKind::Fn { dim, probes, domain } = kind else { return Vec::new() };
    let width = domain.as_ref().map(|b| (b.diameter() / 2.0).max(1e-3)).unwrap_or(1.0);
    let mut out = vec![AlgebraElement::func(FnExpr::Const(c(1.0, 0.0)))];
    for k in 0..*dim {
        out.push(AlgebraElement::func(FnExpr::Coord(k)));
    }
    let picks = [0, probes.len() / 2, probes.len() - 1];
    let mut seen = Vec::new();
    for &i in &picks {
        if !seen.contains(&i) {
            seen.push(i);
            out.push(AlgebraElement::func(FnExpr::Bump { center: probes[i].clone(), width }));
        }
    }
    let x0 = Arc::new(FnExpr::Coord(0));
    let xl = Arc::new(FnExpr::Coord(dim - 1));
    out.push(AlgebraElement::func(FnExpr::Mul(x0.clone(), xl)));
    let bump = Arc::new(FnExpr::Bump { center: probes[probes.len() / 2].clone(), width });
    out.push(AlgebraElement::func(FnExpr::Add(Arc::new(FnExpr::Scale(c(0.0, 1.0), x0)), bump)));
    out
}

fn fn_functionals(kind: &AlgebraKind) -> Vec<Functional> {
    let AlgebraKind::Fn { probes, .. } = kind else { return Vec::new() };
    let n = probes.len();
    let step = (n / 6).max(1);
    let mut out = Vec::new();
    let picked: Vec<usize> = (0..n).step_by(step).take(6).collect();
    for &i in &picked {
        out.push(Functional::DiracMix(vec![(probes[i].clone(), 1.0)]));
    }
    if picked.len() >= 2 {
        let (i, j) = (picked[0], picked[picked.len() - 1]);
        out.push(Functional::DiracMix(vec![(probes[i].clone(), 0.3), (probes[j].clone(), 0.5)]));
        out.push(Functional::DiracMix(vec![(probes[j].clone(), 2.0)]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_is_involution() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5), c(-2.0, 0.0)]);
        let a = AlgebraElement::Mat(m.clone());
        assert_eq!(a.adjoint().adjoint().as_mat().unwrap(), &m);
    }

    #[test]
    fn effects() {
        let alg = StarAlgebra::matrix_algebra("M2", 2, 1e-12).unwrap();
        assert!(alg.is_effect(&alg.unit(), 1e-12));
        assert!(!alg.is_effect(&alg.unit().scale(c(2.0, 0.0)), 1e-12));
        assert!(alg.is_effect(&AlgebraElement::real_diag(&[1.0, 0.0]), 1e-12));
    }

    #[test]
    fn block_basis_skips_off_block_units() {
        let alg = StarAlgebra::block_algebra("B", 4, 2, 1e-12).unwrap();
        assert_eq!(alg.test_basis().len(), 8);
        assert!(StarAlgebra::block_algebra("bad", 3, 2, 1e-12).is_err());
    }

    #[test]
    fn sampled_densities_are_psd() {
        let alg = StarAlgebra::block_algebra("B", 4, 2, 1e-12).unwrap();
        for f in alg.sample_functionals() {
            if let Functional::Mat(r) = f {
                assert!(min_eigenvalue(r) > -1e-12);
                assert!(off_block_norm(r, 2) == 0.0);
            }
        }
    }
}
