//! Positive maps between algebras and channels between their duals.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use super::element::{c, AlgebraElement, CMat, StarAlgebra};
use super::expr::{FnExpr, Point, PointMap};
use super::functional::Functional;
use crate::category::{CatMorphism, CatObject, LazyCategory, Sampler};
use crate::error::{Error, Result};
use crate::report::LawReport;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MapFlags {
    pub star_hom: bool,
    pub unital: bool,
    pub subunital: bool,
}

impl MapFlags {
    pub const HOM: MapFlags = MapFlags { star_hom: true, unital: true, subunital: true };
    pub const SUBUNITAL: MapFlags = MapFlags { star_hom: false, unital: false, subunital: true };
    pub const POSITIVE: MapFlags = MapFlags { star_hom: false, unital: false, subunital: false };

    fn and(self, o: MapFlags) -> MapFlags {
        MapFlags { star_hom: self.star_hom && o.star_hom, unital: self.unital && o.unital, subunital: self.subunital && o.subunital }
    }
}

type ElemFn = Arc<dyn Fn(&AlgebraElement) -> Result<AlgebraElement> + Send + Sync>;
type DualFn = Arc<dyn Fn(&Functional) -> Result<Functional> + Send + Sync>;

#[derive(Clone)]
pub enum MapKind {
    Identity,
    /// `f ↦ f∘θ` with `θ` from target points to source points.
    Pullback(PointMap),
    /// `f ↦ ⊕ᵢ f(pᵢ)·1_block`, into block-diagonal matrices.
    Evaluate { points: Vec<Point>, block: usize },
    /// `b ↦ Σ K* b K`.
    Kraus(Vec<CMat>),
    /// `b ↦ a* b a`.
    Delta(AlgebraElement),
    /// `(a_j)_j ↦ (U* a_{m(i)} U)_i` on block-diagonal matrices.
    BlockShift { index_map: Vec<usize>, block: usize, unitary: CMat },
    /// `outer ∘ inner`.
    Compose(PositiveMap, PositiveMap),
    Custom { f: ElemFn, dual: Option<DualFn> },
}

struct MapData {
    label: String,
    source: StarAlgebra,
    target: StarAlgebra,
    kind: MapKind,
    flags: MapFlags,
}

/// A positive linear map between two algebras.
#[derive(Clone)]
pub struct PositiveMap {
    inner: Arc<MapData>,
}

impl fmt::Debug for PositiveMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PositiveMap({}: {} -> {})", self.inner.label, self.inner.source.label(), self.inner.target.label())
    }
}

impl CatMorphism for PositiveMap {
    type Obj = StarAlgebra;
    fn dom(&self) -> StarAlgebra {
        self.inner.source.clone()
    }
    fn cod(&self) -> StarAlgebra {
        self.inner.target.clone()
    }
    fn label(&self) -> String {
        format!("{}: {} -> {}", self.inner.label, self.inner.source.label(), self.inner.target.label())
    }
}

fn block_diag_scalars(values: &[Complex64], block: usize) -> CMat {
    let d = values.len() * block;
    let diag: Vec<Complex64> = values.iter().flat_map(|v| std::iter::repeat(*v).take(block)).collect();
    CMat::from_diagonal(&DVector::from_vec(diag)).resize(d, d, c(0.0, 0.0))
}

fn block_of(m: &CMat, i: usize, block: usize) -> CMat {
    m.view((i * block, i * block), (block, block)).into_owned()
}

impl PositiveMap {
    pub fn new(label: impl Into<String>, source: StarAlgebra, target: StarAlgebra, kind: MapKind, flags: MapFlags) -> Self {
        PositiveMap { inner: Arc::new(MapData { label: label.into(), source, target, kind, flags }) }
    }

    pub fn identity(alg: &StarAlgebra) -> Self {
        Self::new(format!("id[{}]", alg.label()), alg.clone(), alg.clone(), MapKind::Identity, MapFlags::HOM)
    }

    pub fn pullback(label: impl Into<String>, source: &StarAlgebra, target: &StarAlgebra, theta: PointMap) -> Self {
        Self::new(label, source.clone(), target.clone(), MapKind::Pullback(theta), MapFlags::HOM)
    }

    pub fn evaluate(label: impl Into<String>, source: &StarAlgebra, target: &StarAlgebra, points: Vec<Point>) -> Result<Self> {
        let (d, block) = target.mat_dim().ok_or_else(|| Error::VariantMismatch("evaluation lands in a matrix algebra".into()))?;
        if !source.is_fn() {
            return Err(Error::VariantMismatch("evaluation starts from a function algebra".into()));
        }
        if points.len() * block != d {
            return Err(Error::Precondition(format!("{} points of block {} do not fill dimension {}", points.len(), block, d)));
        }
        Ok(Self::new(label, source.clone(), target.clone(), MapKind::Evaluate { points, block }, MapFlags::HOM))
    }

    pub fn kraus(label: impl Into<String>, alg: &StarAlgebra, ops: Vec<CMat>) -> Self {
        let d = alg.mat_dim().map(|x| x.0).unwrap_or(0);
        let mut sum = CMat::zeros(d, d);
        for k in &ops {
            sum += k.adjoint() * k;
        }
        let unital = (&sum - CMat::identity(d, d)).iter().all(|z| z.norm() < 1e-12);
        let subunital = super::element::hermitian_eigenvalues(&sum).iter().all(|l| *l <= 1.0 + 1e-12);
        let star_hom = ops.len() == 1 && unital;
        Self::new(label, alg.clone(), alg.clone(), MapKind::Kraus(ops), MapFlags { star_hom, unital, subunital })
    }

    /// `δ(a): b ↦ a* b a`.
    pub fn delta(alg: &StarAlgebra, a: &AlgebraElement) -> Self {
        let aa = a.square_norm();
        let unital = alg.distance(&aa, &alg.unit()) <= 1e-12;
        let subunital = alg.in_unit_ball(a, 1e-12);
        let star_hom = unital && matches!(a, AlgebraElement::Fn(_)) || (unital && alg.distance(&a.mul(&a.adjoint()).unwrap_or(alg.zero()), &alg.unit()) <= 1e-12);
        Self::new(format!("δ({})", a.describe()), alg.clone(), alg.clone(), MapKind::Delta(a.clone()), MapFlags { star_hom, unital, subunital })
    }

    pub fn block_shift(label: impl Into<String>, source: &StarAlgebra, target: &StarAlgebra, index_map: Vec<usize>, unitary: CMat) -> Result<Self> {
        let (ds, bs) = source.mat_dim().ok_or_else(|| Error::VariantMismatch("block shift needs matrices".into()))?;
        let (dt, bt) = target.mat_dim().ok_or_else(|| Error::VariantMismatch("block shift needs matrices".into()))?;
        if bs != bt || unitary.nrows() != bs || index_map.len() * bt != dt || index_map.iter().any(|j| (j + 1) * bs > ds) {
            return Err(Error::Precondition("block shift shape mismatch".into()));
        }
        Ok(Self::new(label, source.clone(), target.clone(), MapKind::BlockShift { index_map, block: bs, unitary }, MapFlags::HOM))
    }

    pub fn custom(
        label: impl Into<String>,
        source: &StarAlgebra,
        target: &StarAlgebra,
        flags: MapFlags,
        f: impl Fn(&AlgebraElement) -> Result<AlgebraElement> + Send + Sync + 'static,
        dual: Option<DualFn>,
    ) -> Self {
        Self::new(label, source.clone(), target.clone(), MapKind::Custom { f: Arc::new(f), dual }, flags)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PositiveMap) -> Result<PositiveMap> {
        if !inner.inner.target.same(&self.inner.source) {
            return Err(Error::CompositionDomain(format!(
                "{} lands in {} but {} starts at {}",
                inner.inner.label,
                inner.inner.target.label(),
                self.inner.label,
                self.inner.source.label()
            )));
        }
        if matches!(self.inner.kind, MapKind::Identity) {
            return Ok(inner.clone());
        }
        if matches!(inner.inner.kind, MapKind::Identity) {
            return Ok(self.clone());
        }
        Ok(Self::new(
            format!("{}∘{}", self.inner.label, inner.inner.label),
            inner.inner.source.clone(),
            self.inner.target.clone(),
            MapKind::Compose(self.clone(), inner.clone()),
            self.inner.flags.and(inner.inner.flags),
        ))
    }

    pub fn label_str(&self) -> &str {
        &self.inner.label
    }
    pub fn source(&self) -> &StarAlgebra {
        &self.inner.source
    }
    pub fn target(&self) -> &StarAlgebra {
        &self.inner.target
    }
    pub fn flags(&self) -> MapFlags {
        self.inner.flags
    }
    pub fn kind(&self) -> &MapKind {
        &self.inner.kind
    }

    pub fn with_label(&self, label: impl Into<String>) -> PositiveMap {
        Self::new(label, self.inner.source.clone(), self.inner.target.clone(), self.inner.kind.clone(), self.inner.flags)
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        match &self.inner.kind {
            MapKind::Identity => Ok(a.clone()),
            MapKind::Pullback(theta) => match a {
                AlgebraElement::Fn(e) => Ok(AlgebraElement::Fn(Arc::new(FnExpr::Pullback(e.clone(), theta.clone())))),
                _ => Err(Error::VariantMismatch("pullback of a matrix".into())),
            },
            MapKind::Evaluate { points, block } => match a {
                AlgebraElement::Fn(e) => {
                    let vals: Vec<Complex64> = points.iter().map(|p| e.eval(p)).collect();
                    Ok(AlgebraElement::Mat(block_diag_scalars(&vals, *block)))
                }
                _ => Err(Error::VariantMismatch("evaluation of a matrix".into())),
            },
            MapKind::Kraus(ops) => match a {
                AlgebraElement::Mat(b) => {
                    let mut out = CMat::zeros(b.nrows(), b.ncols());
                    for k in ops {
                        out += k.adjoint() * b * k;
                    }
                    Ok(AlgebraElement::Mat(out))
                }
                _ => Err(Error::VariantMismatch("Kraus map on a function".into())),
            },
            MapKind::Delta(x) => x.adjoint().mul(a)?.mul(x),
            MapKind::BlockShift { index_map, block, unitary } => match a {
                AlgebraElement::Mat(m) => {
                    let n = index_map.len();
                    let mut out = CMat::zeros(n * block, n * block);
                    for (i, &j) in index_map.iter().enumerate() {
                        let b = unitary.adjoint() * block_of(m, j, *block) * unitary;
                        out.view_mut((i * block, i * block), (*block, *block)).copy_from(&b);
                    }
                    Ok(AlgebraElement::Mat(out))
                }
                _ => Err(Error::VariantMismatch("block shift of a function".into())),
            },
            MapKind::Compose(outer, inner) => outer.apply(&inner.apply(a)?),
            MapKind::Custom { f, .. } => f(a),
        }
    }

    /// Closed-form dual `φ ↦ φ∘T`.
    pub fn dual_apply(&self, phi: &Functional) -> Result<Functional> {
        if let Functional::Pulled { .. } = phi {
            return Ok(Functional::Pulled { base: Box::new(phi.clone()), map: self.clone() });
        }
        match (&self.inner.kind, phi) {
            (MapKind::Identity, _) => Ok(phi.clone()),
            (MapKind::Pullback(theta), Functional::DiracMix(atoms)) => {
                Ok(Functional::DiracMix(atoms.iter().map(|(p, w)| (theta.apply(p), *w)).collect()))
            }
            (MapKind::Evaluate { points, block }, Functional::Mat(rho)) => Ok(Functional::DiracMix(
                points.iter().enumerate().map(|(i, p)| (p.clone(), block_of(rho, i, *block).trace().re)).collect(),
            )),
            (MapKind::Kraus(ops), Functional::Mat(rho)) => {
                let mut out = CMat::zeros(rho.nrows(), rho.ncols());
                for k in ops {
                    out += k * rho * k.adjoint();
                }
                Ok(Functional::Mat(out))
            }
            (MapKind::Delta(AlgebraElement::Mat(x)), Functional::Mat(rho)) => Ok(Functional::Mat(x * rho * x.adjoint())),
            (MapKind::Delta(AlgebraElement::Fn(x)), Functional::DiracMix(atoms)) => {
                Ok(Functional::DiracMix(atoms.iter().map(|(p, w)| (p.clone(), w * x.eval(p).norm_sqr())).collect()))
            }
            (MapKind::BlockShift { index_map, block, unitary }, Functional::Mat(rho)) => {
                let (ds, _) = self.inner.source.mat_dim().expect("matrix source");
                let mut out = CMat::zeros(ds, ds);
                for (i, &j) in index_map.iter().enumerate() {
                    let b = unitary * block_of(rho, i, *block) * unitary.adjoint();
                    let mut v = out.view_mut((j * block, j * block), (*block, *block));
                    v += b;
                }
                Ok(Functional::Mat(out))
            }
            (MapKind::Compose(outer, inner), _) => inner.dual_apply(&outer.dual_apply(phi)?),
            (MapKind::Custom { dual: Some(d), .. }, _) => d(phi),
            (MapKind::Custom { dual: None, .. }, _) => Ok(Functional::Pulled { base: Box::new(phi.clone()), map: self.clone() }),
            _ => Err(Error::VariantMismatch(format!("dual of {} on {}", self.inner.label, phi.describe()))),
        }
    }

    /// Some `φ` with `φ∘T = χ`, when the map kind allows solving for it.
    pub fn dual_preimage(&self, chi: &Functional) -> Option<Functional> {
        match (&self.inner.kind, chi) {
            (MapKind::Identity, _) => Some(chi.clone()),
            (MapKind::Pullback(theta), Functional::DiracMix(atoms)) => {
                let inv = theta.inverse()?;
                Some(Functional::DiracMix(atoms.iter().map(|(p, w)| (inv.apply(p), *w)).collect()))
            }
            (MapKind::Evaluate { points, block }, Functional::DiracMix(atoms)) => {
                let mut weights = vec![0.0; points.len()];
                for (p, w) in atoms {
                    let i = points.iter().position(|q| q.iter().zip(p).all(|(a, b)| (a - b).abs() <= 1e-9))?;
                    weights[i] += w;
                }
                let vals: Vec<Complex64> = weights.iter().map(|w| c(w / *block as f64, 0.0)).collect();
                Some(Functional::Mat(block_diag_scalars(&vals, *block)))
            }
            (MapKind::Kraus(ops), Functional::Mat(rho)) if ops.len() == 1 && self.inner.flags.star_hom => {
                let k = &ops[0];
                Some(Functional::Mat(k.adjoint() * rho * k))
            }
            (MapKind::BlockShift { index_map, block, unitary }, Functional::Mat(rho)) => {
                let (ds, _) = self.inner.source.mat_dim()?;
                let n_src = ds / block;
                let mut seen = vec![false; n_src];
                for &j in index_map {
                    if seen[j] {
                        return None;
                    }
                    seen[j] = true;
                }
                if seen.iter().any(|s| !s) {
                    // source blocks outside the image must carry no weight
                    for (j, s) in seen.iter().enumerate() {
                        if !s && block_of(rho, j, *block).iter().any(|z| z.norm() > 1e-12) {
                            return None;
                        }
                    }
                }
                let n = index_map.len();
                let mut out = CMat::zeros(n * block, n * block);
                for (i, &j) in index_map.iter().enumerate() {
                    let b = unitary.adjoint() * block_of(rho, j, *block) * unitary;
                    out.view_mut((i * block, i * block), (*block, *block)).copy_from(&b);
                }
                Some(Functional::Mat(out))
            }
            (MapKind::Compose(outer, inner), _) => outer.dual_preimage(&inner.dual_preimage(chi)?),
            _ => None,
        }
    }

    /// Max distance of images over the source test basis.
    pub fn distance(&self, other: &PositiveMap) -> f64 {
        if !self.inner.source.same(&other.inner.source) || !self.inner.target.same(&other.inner.target) {
            return f64::INFINITY;
        }
        let tgt = &self.inner.target;
        self.inner
            .source
            .test_basis()
            .iter()
            .map(|b| match (self.apply(b), other.apply(b)) {
                (Ok(x), Ok(y)) => tgt.distance(&x, &y),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

/// Verify linearity, positivity, the unit bound and (if flagged) the *-hom
/// property of `t` on its source test basis.
pub fn check_positive_map(t: &PositiveMap, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("positive map {}", t.label_str()));
    let (src, tgt) = (t.source(), t.target());
    let basis = src.test_basis();
    let z = c(0.7, -0.4);
    for (i, a) in basis.iter().enumerate() {
        let b = &basis[(i + 1) % basis.len()];
        let combo = a.add(&b.scale(z)).expect("same algebra");
        let lhs = t.apply(&combo);
        let rhs = t.apply(a).and_then(|ta| t.apply(b).and_then(|tb| ta.add(&tb.scale(z))));
        let d = match (&lhs, &rhs) {
            (Ok(x), Ok(y)) => tgt.distance(x, y),
            _ => f64::INFINITY,
        };
        r.record(d, tol, || (vec![src.label().into()], vec![t.label_str().into()], format!("T(a+zb) for a={}", a.describe()), "T(a)+zT(b)".into()));
        let sq = combo.square_norm();
        let pos = t.apply(&sq).map(|x| tgt.is_positive(&x, tol)).unwrap_or(false);
        r.record_bool(pos, || (vec![src.label().into()], vec![t.label_str().into()], format!("T(a*a) for a={}", combo.describe()), "positive".into()));
        if t.flags().star_hom {
            let lhs = t.apply(&a.mul(b).expect("same algebra"));
            let rhs = t.apply(a).and_then(|x| t.apply(b).and_then(|y| x.mul(&y)));
            let d = match (&lhs, &rhs) {
                (Ok(x), Ok(y)) => tgt.distance(x, y),
                _ => f64::INFINITY,
            };
            r.record(d, tol, || (vec![src.label().into()], vec![t.label_str().into()], "T(ab)".into(), "T(a)T(b)".into()));
            let lhs = t.apply(&a.adjoint());
            let rhs = t.apply(a).map(|x| x.adjoint());
            let d = match (&lhs, &rhs) {
                (Ok(x), Ok(y)) => tgt.distance(x, y),
                _ => f64::INFINITY,
            };
            r.record(d, tol, || (vec![src.label().into()], vec![t.label_str().into()], "T(a*)".into(), "T(a)*".into()));
        }
    }
    if t.flags().subunital {
        let gap = t.apply(&src.unit()).and_then(|u| tgt.unit().sub(&u));
        let ok = gap.map(|g| tgt.is_positive(&g, tol)).unwrap_or(false);
        r.record_bool(ok, || (vec![src.label().into()], vec![t.label_str().into()], "T(1)".into(), "≤ 1".into()));
    }
    if t.flags().unital {
        let d = t.apply(&src.unit()).map(|u| tgt.distance(&u, &tgt.unit())).unwrap_or(f64::INFINITY);
        r.record(d, tol, || (vec![src.label().into()], vec![t.label_str().into()], "T(1)".into(), "1".into()));
    }
    r
}

/// The dual space of an algebra, as an object of the category of channels.
#[derive(Debug, Clone)]
pub struct DualSpace(pub StarAlgebra);

impl CatObject for DualSpace {
    fn id(&self) -> String {
        format!("dual[{}]", self.0.label())
    }
}

type ChannelFn = Arc<dyn Fn(&Functional) -> Result<Functional> + Send + Sync>;

#[derive(Clone)]
pub enum ChannelKind {
    /// `φ ↦ φ∘T` in closed form.
    Dagger(PositiveMap),
    /// `φ ↦ φ∘T` kept unevaluated.
    Lazy(PositiveMap),
    /// `outer ∘ inner`.
    Compose(Box<Channel>, Box<Channel>),
    Custom { f: ChannelFn, is_channel: bool },
}

/// A map from functionals on `source` to functionals on `target`.
#[derive(Clone)]
pub struct Channel {
    pub label: String,
    pub source: StarAlgebra,
    pub target: StarAlgebra,
    pub kind: ChannelKind,
}

impl fmt::Debug for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Channel({}: dual {} -> dual {})", self.label, self.source.label(), self.target.label())
    }
}

impl CatMorphism for Channel {
    type Obj = DualSpace;
    fn dom(&self) -> DualSpace {
        DualSpace(self.source.clone())
    }
    fn cod(&self) -> DualSpace {
        DualSpace(self.target.clone())
    }
    fn label(&self) -> String {
        format!("{}: dual[{}] -> dual[{}]", self.label, self.source.label(), self.target.label())
    }
}

/// `T†: φ ↦ φ∘T`. Non-subunital maps still yield a dual map, flagged by
/// [`Channel::is_channel`].
pub fn dagger(t: &PositiveMap) -> Channel {
    Channel { label: format!("({})†", t.label_str()), source: t.target().clone(), target: t.source().clone(), kind: ChannelKind::Dagger(t.clone()) }
}

/// `T†` evaluated by composition rather than in closed form.
pub fn dagger_lazy(t: &PositiveMap) -> Channel {
    Channel { label: format!("({})†lazy", t.label_str()), source: t.target().clone(), target: t.source().clone(), kind: ChannelKind::Lazy(t.clone()) }
}

impl Channel {
    pub fn identity(alg: &StarAlgebra) -> Channel {
        dagger(&PositiveMap::identity(alg))
    }

    pub fn custom(
        label: impl Into<String>,
        source: &StarAlgebra,
        target: &StarAlgebra,
        is_channel: bool,
        f: impl Fn(&Functional) -> Result<Functional> + Send + Sync + 'static,
    ) -> Channel {
        Channel { label: label.into(), source: source.clone(), target: target.clone(), kind: ChannelKind::Custom { f: Arc::new(f), is_channel } }
    }

    pub fn apply(&self, phi: &Functional) -> Result<Functional> {
        match &self.kind {
            ChannelKind::Dagger(t) => t.dual_apply(phi),
            ChannelKind::Lazy(t) => Ok(Functional::Pulled { base: Box::new(phi.clone()), map: t.clone() }),
            ChannelKind::Compose(outer, inner) => outer.apply(&inner.apply(phi)?),
            ChannelKind::Custom { f, .. } => f(phi),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Channel) -> Result<Channel> {
        if !inner.target.same(&self.source) {
            return Err(Error::CompositionDomain(format!("{} then {}", inner.label, self.label)));
        }
        if let (ChannelKind::Dagger(t), ChannelKind::Dagger(s)) = (&self.kind, &inner.kind) {
            // T† ∘ S† = (S∘T)†
            return Ok(dagger(&s.compose(t)?));
        }
        Ok(Channel {
            label: format!("{}∘{}", self.label, inner.label),
            source: inner.source.clone(),
            target: self.target.clone(),
            kind: ChannelKind::Compose(Box::new(self.clone()), Box::new(inner.clone())),
        })
    }

    /// Subunital dual maps are strength non-increasing.
    pub fn is_channel(&self) -> bool {
        match &self.kind {
            ChannelKind::Dagger(t) | ChannelKind::Lazy(t) => t.flags().subunital,
            ChannelKind::Compose(a, b) => a.is_channel() && b.is_channel(),
            ChannelKind::Custom { is_channel, .. } => *is_channel,
        }
    }

    /// Max output distance over the source's sampled functionals.
    pub fn distance(&self, other: &Channel) -> f64 {
        if !self.source.same(&other.source) || !self.target.same(&other.target) {
            return f64::INFINITY;
        }
        self.source
            .sample_functionals()
            .iter()
            .map(|phi| match (self.apply(phi), other.apply(phi)) {
                (Ok(a), Ok(b)) => a.distance(&b, &self.target),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

/// The category of algebras and positive maps, presented without objects.
pub fn tsa_category(name: &str) -> LazyCategory<PositiveMap> {
    LazyCategory::builder(name)
        .compose(|g: &PositiveMap, h: &PositiveMap| g.compose(h).expect("endpoints checked by the category"))
        .identity(PositiveMap::identity)
        .distance(|a, b| a.distance(b))
        .sampler(Sampler::default())
        .build()
}

/// The category of dual spaces and channels, presented without objects.
pub fn dual_category(name: &str) -> LazyCategory<Channel> {
    LazyCategory::builder(name)
        .compose(|g: &Channel, h: &Channel| g.compose(h).expect("endpoints checked by the category"))
        .identity(|x: &DualSpace| Channel::identity(&x.0))
        .distance(|a, b| a.distance(b))
        .sampler(Sampler::default())
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> StarAlgebra {
        StarAlgebra::matrix_algebra("M2", 2, 1e-12).unwrap()
    }

    #[test]
    fn delta_of_unit_is_identity() {
        let a = m2();
        let d = PositiveMap::delta(&a, &a.unit());
        assert!(d.distance(&PositiveMap::identity(&a)) < 1e-15);
        assert!(d.flags().star_hom);
    }

    #[test]
    fn delta_projection_on_unit() {
        let a = m2();
        let p = AlgebraElement::real_diag(&[1.0, 0.0]);
        let d = PositiveMap::delta(&a, &p);
        let out = d.apply(&a.unit()).unwrap();
        assert!(a.distance(&out, &p) < 1e-15);
        assert!(d.flags().subunital && !d.flags().unital);
    }

    #[test]
    fn closed_form_dual_matches_lazy() {
        let a = m2();
        let k = CMat::from_row_slice(2, 2, &[c(0.5, 0.1), c(0.2, 0.0), c(0.0, -0.3), c(0.4, 0.0)]);
        let t = PositiveMap::kraus("K", &a, vec![k]);
        for phi in a.sample_functionals() {
            let x = dagger(&t).apply(phi).unwrap();
            let y = dagger_lazy(&t).apply(phi).unwrap();
            assert!(x.distance(&y, &a) < 1e-14);
        }
    }

    #[test]
    fn evaluate_dual_and_preimage() {
        let f = StarAlgebra::function_algebra("F", 1, vec![vec![0.0], vec![1.0], vec![2.0]], None, 1e-12).unwrap();
        let q = StarAlgebra::block_algebra("Q", 4, 2, 1e-12).unwrap();
        let t = PositiveMap::evaluate("ev", &f, &q, vec![vec![0.0], vec![2.0]]).unwrap();
        assert!(check_positive_map(&t, 1e-12).passed());
        let rho = q.sample_functionals()[3].clone();
        let chi = t.dual_apply(&rho).unwrap();
        let pre = t.dual_preimage(&chi).unwrap();
        assert!(t.dual_apply(&pre).unwrap().distance(&chi, &f) < 1e-14);
        assert!(t.dual_preimage(&Functional::dirac(vec![1.0])).is_none());
    }

    #[test]
    fn block_shift_is_a_hom_with_consistent_dual() {
        let src = StarAlgebra::block_algebra("S", 6, 2, 1e-12).unwrap();
        let tgt = StarAlgebra::block_algebra("T", 4, 2, 1e-12).unwrap();
        let th: f64 = 0.3;
        let u = CMat::from_row_slice(2, 2, &[c(th.cos(), 0.0), c(-th.sin(), 0.0), c(th.sin(), 0.0), c(th.cos(), 0.0)]);
        let t = PositiveMap::block_shift("sh", &src, &tgt, vec![2, 0], u).unwrap();
        assert!(check_positive_map(&t, 1e-12).passed());
        for phi in tgt.sample_functionals() {
            let x = dagger(&t).apply(phi).unwrap();
            let y = dagger_lazy(&t).apply(phi).unwrap();
            assert!(x.distance(&y, &src) < 1e-13);
        }
    }
}
