//! Dynamical patterns, their morphisms, and the channel/device category.

use std::fmt;

use crate::algebra::maps::{dagger, dual_category, tsa_category};
use crate::algebra::{check_positive_map, Channel, DualSpace, PositiveMap, StarAlgebra};
use crate::category::{
    check_functor_laws, check_naturality, compose_functors, functors_agree, CatMorphism, CatObject, FunctorMap, LazyCategory, MorHandle,
    NatTransMap, ObjHandle, Op, Sampler, SamplerConfig,
};
use crate::error::{Error, Result};
use crate::report::LawReport;

pub type DynCat = LazyCategory<MorHandle>;
pub type Dynamics = FunctorMap<MorHandle, PositiveMap>;
pub type CtxFunctor = FunctorMap<MorHandle, MorHandle>;

/// A dynamical category together with a functor into algebras and *-homs.
#[derive(Clone)]
pub struct DynamicalPattern {
    pub label: String,
    pub tau: Dynamics,
    dual: FunctorMap<Op<MorHandle>, Channel>,
}

impl fmt::Debug for DynamicalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DynamicalPattern({} over {})", self.label, self.tau.source.name())
    }
}

impl CatObject for DynamicalPattern {
    fn id(&self) -> String {
        self.label.clone()
    }
}

impl DynamicalPattern {
    pub fn new(
        label: impl Into<String>,
        g: DynCat,
        algebra: impl Fn(&ObjHandle) -> StarAlgebra + Send + Sync + 'static,
        tau: impl Fn(&MorHandle) -> PositiveMap + Send + Sync + 'static,
    ) -> Self {
        let label = label.into();
        let tau = FunctorMap::new(format!("σ[{label}]"), g, tsa_category("tsa"), algebra, tau);
        let (t1, t2) = (tau.clone(), tau.clone());
        let dual = FunctorMap::new(
            format!("{}†", tau.name),
            tau.source.opposite(),
            dual_category("tsa†"),
            move |x| DualSpace(t1.obj(x)),
            move |g: &Op<MorHandle>| dagger(&t2.mor(&g.0)),
        );
        DynamicalPattern { label, tau, dual }
    }

    pub fn g(&self) -> &DynCat {
        &self.tau.source
    }

    pub fn algebra(&self, x: &ObjHandle) -> StarAlgebra {
        self.tau.obj(x)
    }

    pub fn dynamics(&self, g: &MorHandle) -> PositiveMap {
        self.tau.mor(g)
    }

    /// `σ†: G^op → tsa†`, `g ↦ τ(g)†`.
    pub fn dual(&self) -> FunctorMap<Op<MorHandle>, Channel> {
        self.dual.clone()
    }
}

/// Functoriality of `τ` plus the unital *-hom property of every sampled `τ(g)`.
pub fn check_pattern(p: &DynamicalPattern, tol: f64) -> LawReport {
    let mut r = check_functor_laws(&p.tau, tol);
    r.law = format!("dynamical pattern {}", p.label);
    for g in &p.g().sampler().morphisms {
        let t = p.dynamics(g);
        let flags = t.flags();
        r.record_bool(flags.star_hom && flags.unital, || (vec![g.dom.id(), g.cod.id()], vec![g.label()], t.label(), "unital *-hom".into()));
        r.absorb(check_positive_map(&t, tol));
    }
    r
}

fn check_direction(src: &DynamicalPattern, dst: &DynamicalPattern, f: &CtxFunctor) -> Result<()> {
    if f.source.name() != dst.g().name() || f.target.name() != src.g().name() {
        return Err(Error::FunctorMismatch(format!(
            "functor part {} runs {} -> {}, expected {} -> {}",
            f.name,
            f.source.name(),
            f.target.name(),
            dst.g().name(),
            src.g().name()
        )));
    }
    Ok(())
}

/// A morphism `(f, T)` of dynamical patterns, with `f: G_dst → G_src`.
#[derive(Clone)]
pub struct DpMorphism {
    pub src: DynamicalPattern,
    pub dst: DynamicalPattern,
    pub f: CtxFunctor,
    pub t: NatTransMap<MorHandle, PositiveMap>,
}

impl fmt::Debug for DpMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DpMorphism({}: {} -> {})", self.t.name, self.src.label, self.dst.label)
    }
}

impl CatMorphism for DpMorphism {
    type Obj = DynamicalPattern;
    fn dom(&self) -> DynamicalPattern {
        self.src.clone()
    }
    fn cod(&self) -> DynamicalPattern {
        self.dst.clone()
    }
    fn label(&self) -> String {
        format!("({}, {}): {} -> {}", self.f.name, self.t.name, self.src.label, self.dst.label)
    }
}

impl DpMorphism {
    /// `component(x): A_src(f x) → A_dst(x)`.
    pub fn new(
        name: impl Into<String>,
        src: &DynamicalPattern,
        dst: &DynamicalPattern,
        f: CtxFunctor,
        component: impl Fn(&ObjHandle) -> PositiveMap + Send + Sync + 'static,
    ) -> Result<Self> {
        check_direction(src, dst, &f)?;
        let source = compose_functors(&src.tau, &f)?;
        let t = NatTransMap::new(name, source, dst.tau.clone(), component);
        Ok(DpMorphism { src: src.clone(), dst: dst.clone(), f, t })
    }

    /// `1_𝔄 = (1_G, 1_σ)`.
    pub fn identity(p: &DynamicalPattern) -> Self {
        let tau = p.tau.clone();
        DpMorphism::new(format!("1[{}]", p.label), p, p, FunctorMap::identity(p.g()), move |x| PositiveMap::identity(&tau.obj(x)))
            .expect("identity morphism is well formed")
    }

    pub fn component(&self, x: &ObjHandle) -> PositiveMap {
        self.t.at(x)
    }
}

/// `(g,S)∘(f,T) = (f∘g, S∘(T∗1_g))`.
pub fn dp_compose(gs: &DpMorphism, ft: &DpMorphism) -> Result<DpMorphism> {
    if ft.dst.label != gs.src.label {
        return Err(Error::CompositionDomain(format!("{} ends at {} but {} starts at {}", ft.t.name, ft.dst.label, gs.t.name, gs.src.label)));
    }
    let f = compose_functors(&ft.f, &gs.f)?;
    let (s, t, g) = (gs.t.clone(), ft.t.clone(), gs.f.clone());
    DpMorphism::new(format!("{}∘{}", gs.t.name, ft.t.name), &ft.src, &gs.dst, f, move |x| {
        s.at(x).compose(&t.at(&g.obj(x))).expect("whiskered components compose")
    })
}

fn component_distance<M: CatMorphism>(cat: &DynCat, a: impl Fn(&ObjHandle) -> M, b: impl Fn(&ObjHandle) -> M, d: impl Fn(&M, &M) -> f64) -> f64 {
    cat.sampler().objects.iter().map(|x| d(&a(x), &b(x))).fold(0.0, f64::max)
}

/// Componentwise distance on the sampled objects of `G_dst`; infinite when
/// the functor parts differ.
pub fn dp_distance(a: &DpMorphism, b: &DpMorphism, tol: f64) -> f64 {
    if a.src.label != b.src.label || a.dst.label != b.dst.label || !functors_agree(&a.f, &b.f, tol) {
        return f64::INFINITY;
    }
    component_distance(a.dst.g(), |x| a.t.at(x), |x| b.t.at(x), |p, q| p.distance(q))
}

/// The square `τ_dst(g)∘T(y) = T(z)∘τ_src(f g)` on sampled `g`, plus the
/// *-hom property of every component.
pub fn check_dp_morphism(m: &DpMorphism, tol: f64) -> LawReport {
    let mut r = check_naturality(&m.t, tol);
    r.law = format!("dp morphism {}", m.t.name);
    for x in &m.dst.g().sampler().objects {
        let c = m.t.at(x);
        r.record_bool(c.flags().star_hom, || (vec![x.id()], vec![c.label()], "component flags".into(), "*-hom".into()));
        r.absorb(check_positive_map(&c, tol));
    }
    r
}

/// A morphism `(f, H, T)` of Chdv: channels `H(x): A_dst(x)† → A_src(f x)†`
/// and subunital devices `T(x): A_src(f x) → A_dst(x)`.
#[derive(Clone)]
pub struct ChdvMorphism {
    pub src: DynamicalPattern,
    pub dst: DynamicalPattern,
    pub f: CtxFunctor,
    pub h: NatTransMap<Op<MorHandle>, Channel>,
    pub t: NatTransMap<MorHandle, PositiveMap>,
}

impl fmt::Debug for ChdvMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChdvMorphism({}, {}: {} -> {})", self.h.name, self.t.name, self.src.label, self.dst.label)
    }
}

impl CatMorphism for ChdvMorphism {
    type Obj = DynamicalPattern;
    fn dom(&self) -> DynamicalPattern {
        self.src.clone()
    }
    fn cod(&self) -> DynamicalPattern {
        self.dst.clone()
    }
    fn label(&self) -> String {
        format!("({}, {}, {}): {} -> {}", self.f.name, self.h.name, self.t.name, self.src.label, self.dst.label)
    }
}

impl ChdvMorphism {
    pub fn new(
        src: &DynamicalPattern,
        dst: &DynamicalPattern,
        f: CtxFunctor,
        h_name: impl Into<String>,
        h: impl Fn(&ObjHandle) -> Channel + Send + Sync + 'static,
        t_name: impl Into<String>,
        t: impl Fn(&ObjHandle) -> PositiveMap + Send + Sync + 'static,
    ) -> Result<Self> {
        check_direction(src, dst, &f)?;
        let dev_source = compose_functors(&src.tau, &f)?;
        let t = NatTransMap::new(t_name, dev_source, dst.tau.clone(), t);
        let ch_target = compose_functors(&src.dual(), &f.opposite())?;
        let h = NatTransMap::new(h_name, dst.dual(), ch_target, h);
        Ok(ChdvMorphism { src: src.clone(), dst: dst.clone(), f, h, t })
    }

    /// `(1_G, 1_{σ†}, 1_σ)`.
    pub fn unit(p: &DynamicalPattern) -> Self {
        psi(&DpMorphism::identity(p))
    }

    /// `a₁`: the functor part.
    pub fn functor(&self) -> &CtxFunctor {
        &self.f
    }
    /// `a₂(x)`: the channel component.
    pub fn channel(&self, x: &ObjHandle) -> Channel {
        self.h.at(x)
    }
    /// `a₃(x)`: the device component.
    pub fn device(&self, x: &ObjHandle) -> PositiveMap {
        self.t.at(x)
    }
}

/// `Ψ(f, T) = (f, T†, T)`.
pub fn psi(m: &DpMorphism) -> ChdvMorphism {
    let (t1, t2) = (m.t.clone(), m.t.clone());
    ChdvMorphism::new(&m.src, &m.dst, m.f.clone(), format!("{}†", m.t.name), move |x| dagger(&t1.at(x)), m.t.name.clone(), move |x| t2.at(x))
        .expect("Ψ of a valid dp morphism")
}

/// `(g,L,S)∘(f,H,T) = (f∘g, (H∗1_g)∘L, S∘(T∗1_g))`.
pub fn chdv_compose(gls: &ChdvMorphism, fht: &ChdvMorphism) -> Result<ChdvMorphism> {
    if fht.dst.label != gls.src.label {
        return Err(Error::CompositionDomain(format!("{} ends at {} but {} starts at {}", fht.t.name, fht.dst.label, gls.t.name, gls.src.label)));
    }
    let f = compose_functors(&fht.f, &gls.f)?;
    let (h, l, g1) = (fht.h.clone(), gls.h.clone(), gls.f.clone());
    let (s, t, g2) = (gls.t.clone(), fht.t.clone(), gls.f.clone());
    ChdvMorphism::new(
        &fht.src,
        &gls.dst,
        f,
        format!("{}∘{}", fht.h.name, gls.h.name),
        move |x| h.at(&g1.obj(x)).compose(&l.at(x)).expect("whiskered channels compose"),
        format!("{}∘{}", gls.t.name, fht.t.name),
        move |x| s.at(x).compose(&t.at(&g2.obj(x))).expect("whiskered devices compose"),
    )
}

pub fn chdv_distance(a: &ChdvMorphism, b: &ChdvMorphism, tol: f64) -> f64 {
    if a.src.label != b.src.label || a.dst.label != b.dst.label || !functors_agree(&a.f, &b.f, tol) {
        return f64::INFINITY;
    }
    let dt = component_distance(a.dst.g(), |x| a.t.at(x), |x| b.t.at(x), |p, q| p.distance(q));
    let dh = component_distance(a.dst.g(), |x| a.h.at(x), |x| b.h.at(x), |p, q| p.distance(q));
    dt.max(dh)
}

/// Both naturality squares, the channel property of each `H(x)` and the
/// subunital positivity of each `T(x)`.
pub fn check_chdv_morphism(m: &ChdvMorphism, tol: f64) -> LawReport {
    let mut r = check_naturality(&m.t, tol);
    r.law = format!("Chdv morphism ({}, {})", m.h.name, m.t.name);
    r.absorb(check_naturality(&m.h, tol));
    for x in &m.dst.g().sampler().objects {
        let (h, t) = (m.h.at(x), m.t.at(x));
        r.record_bool(h.is_channel(), || (vec![x.id()], vec![h.label()], "channel flag".into(), "strength non-increasing".into()));
        for phi in h.source.sample_functionals() {
            let out = h.apply(phi);
            let ok = out.as_ref().map(|o| o.strength() <= phi.strength() + tol && o.is_positive_on(&h.target, tol)).unwrap_or(false);
            r.record_bool(ok, || (vec![x.id()], vec![h.label()], format!("{}(φ)", h.label), "positive, strength ≤ φ(1)".into()));
        }
        r.record_bool(t.flags().subunital, || (vec![x.id()], vec![t.label()], "device flags".into(), "subunital".into()));
        r.absorb(check_positive_map(&t, tol));
    }
    r
}

/// `((g,S)∘(f,T))† = (f,T)†∘(g,S)†`: the unevaluated pullback `φ∘(S∘T)`
/// against the closed-form chain `T†(S†(φ))`, on sampled functionals.
pub fn dagger_contravariance_check(gs: &DpMorphism, ft: &DpMorphism, tol: f64) -> Result<LawReport> {
    let comp = dp_compose(gs, ft)?;
    let mut r = LawReport::new(format!("dagger contravariance ({})∘({})", gs.t.name, ft.t.name));
    for x in &comp.dst.g().sampler().objects {
        let composite = comp.t.at(x);
        let s = gs.t.at(x);
        let t = ft.t.at(&gs.f.obj(x));
        let alg = composite.source().clone();
        for phi in composite.target().sample_functionals() {
            let lhs = crate::algebra::maps::dagger_lazy(&composite).apply(phi)?;
            let rhs = dagger(&t).apply(&dagger(&s).apply(phi)?)?;
            let d = lhs.distance(&rhs, &alg);
            r.record(d, tol, || (vec![x.id()], vec![gs.t.name.clone(), ft.t.name.clone()], "φ∘(S∘T)".into(), "T†(S†(φ))".into()));
        }
    }
    Ok(r)
}

fn sampler_for<M: CatMorphism>(objects: Vec<M::Obj>, morphisms: Vec<M>, cfg: &SamplerConfig) -> Sampler<M> {
    Sampler::from_morphisms(objects, morphisms, cfg)
}

/// The category dp presented on given patterns and generating morphisms.
pub fn dp_category(name: &str, patterns: Vec<DynamicalPattern>, morphisms: Vec<DpMorphism>, tol: f64, cfg: SamplerConfig) -> LazyCategory<DpMorphism> {
    let sampler = sampler_for(patterns.clone(), morphisms, &cfg);
    LazyCategory::builder(name)
        .objects(patterns)
        .compose(|g: &DpMorphism, h: &DpMorphism| dp_compose(g, h).expect("endpoints checked by the category"))
        .identity(DpMorphism::identity)
        .distance(move |a, b| dp_distance(a, b, tol))
        .sampler(sampler)
        .tol(tol)
        .build()
}

/// The category Chdv presented on given patterns and generating morphisms.
pub fn chdv_category(name: &str, patterns: Vec<DynamicalPattern>, morphisms: Vec<ChdvMorphism>, tol: f64, cfg: SamplerConfig) -> LazyCategory<ChdvMorphism> {
    let sampler = sampler_for(patterns.clone(), morphisms, &cfg);
    LazyCategory::builder(name)
        .objects(patterns)
        .compose(|g: &ChdvMorphism, h: &ChdvMorphism| chdv_compose(g, h).expect("endpoints checked by the category"))
        .identity(ChdvMorphism::unit)
        .distance(move |a, b| chdv_distance(a, b, tol))
        .sampler(sampler)
        .tol(tol)
        .build()
}

/// `Ψ(b∘a) = Ψ(b)∘Ψ(a)` and `Ψ(1) = 1` on the sampled pairs of `dp`.
pub fn check_psi_functoriality(dp: &LazyCategory<DpMorphism>, tol: f64) -> LawReport {
    check_psi_functoriality_with(dp, psi, tol)
}

/// As [`check_psi_functoriality`] for an arbitrary candidate `Ψ`.
pub fn check_psi_functoriality_with(dp: &LazyCategory<DpMorphism>, psi: impl Fn(&DpMorphism) -> ChdvMorphism, tol: f64) -> LawReport {
    let mut r = LawReport::new("Ψ functoriality");
    for p in &dp.sampler().objects {
        let d = chdv_distance(&psi(&DpMorphism::identity(p)), &ChdvMorphism::unit(p), tol);
        r.record(d, tol, || (vec![p.id()], vec![], "Ψ(1)".into(), "1".into()));
    }
    for (g, h) in &dp.sampler().pairs {
        let lhs = dp_compose(g, h).map(|c| psi(&c));
        let rhs = chdv_compose(&psi(g), &psi(h));
        let d = match (&lhs, &rhs) {
            (Ok(a), Ok(b)) => chdv_distance(a, b, tol),
            _ => f64::INFINITY,
        };
        r.record(d, tol, || (vec![h.src.id(), h.dst.id(), g.dst.id()], vec![g.label(), h.label()], "Ψ(g∘h)".into(), "Ψ(g)∘Ψ(h)".into()));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{c, CMat};
    use crate::category::time_monoid;

    /// Rotation dynamics on Mat(2) over the time monoid.
    fn rotating(label: &str, alg: &StarAlgebra, omega: f64) -> DynamicalPattern {
        let g = time_monoid(&format!("G[{label}]"), &[0.0, 0.5, 1.0, -0.25]);
        let (a1, a2) = (alg.clone(), alg.clone());
        DynamicalPattern::new(label, g, move |_| a1.clone(), move |m: &MorHandle| {
            let t = m.payload.as_real().unwrap_or(0.0) * omega;
            let u = CMat::from_row_slice(2, 2, &[c(t.cos(), 0.0), c(-t.sin(), 0.0), c(t.sin(), 0.0), c(t.cos(), 0.0)]);
            PositiveMap::kraus(format!("rot({t})"), &a2, vec![u])
        })
    }

    fn relabel(src: &DynamicalPattern, dst: &DynamicalPattern) -> CtxFunctor {
        let so = src.g().objects()[0].clone();
        let s2 = so.clone();
        FunctorMap::new("rel", dst.g().clone(), src.g().clone(), move |_| so.clone(), move |m: &MorHandle| MorHandle::new(s2.clone(), s2.clone(), m.payload.clone()))
    }

    #[test]
    fn identity_pattern_morphism_checks() {
        let a = StarAlgebra::matrix_algebra("M2", 2, 1e-12).unwrap();
        let p = rotating("P", &a, 1.0);
        assert!(check_pattern(&p, 1e-12).passed());
        let id = DpMorphism::identity(&p);
        assert!(check_dp_morphism(&id, 1e-12).passed());
        assert!(check_chdv_morphism(&ChdvMorphism::unit(&p), 1e-12).passed());
    }

    #[test]
    fn same_direction_functor_rejected() {
        let a = StarAlgebra::matrix_algebra("M2", 2, 1e-12).unwrap();
        let p = rotating("P", &a, 1.0);
        let q = rotating("Q", &a, 1.0);
        let wrong = relabel(&q, &p); // runs G_P -> G_Q
        let r = DpMorphism::new("T", &p, &q, wrong, |_| unreachable!());
        assert!(matches!(r, Err(Error::FunctorMismatch(_))));
    }

    #[test]
    fn corrupted_component_is_located() {
        let a = StarAlgebra::matrix_algebra("M2", 2, 1e-12).unwrap();
        let p = rotating("P", &a, 1.0);
        let q = rotating("Q", &a, 1.0);
        let f = relabel(&p, &q);
        let good = DpMorphism::new("T", &p, &q, f.clone(), {
            let a = a.clone();
            move |_| PositiveMap::identity(&a).with_label("id")
        })
        .unwrap();
        assert!(check_dp_morphism(&good, 1e-12).passed());
        let th: f64 = 0.1;
        let u = CMat::from_row_slice(2, 2, &[c(th.cos(), 0.0), c(th.sin(), 0.0), c(-th.sin(), 0.0), c(th.cos(), 0.0)]);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]));
        let bad = DpMorphism::new("T'", &p, &q, f, {
            let a = a.clone();
            move |_| PositiveMap::kraus("phase", &a, vec![d.clone() * u.clone()])
        })
        .unwrap();
        assert!(!check_dp_morphism(&bad, 1e-12).passed());
    }
}
