//! Species, experimental settings, connectors, sections and charges.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::maps::dagger;
use crate::algebra::{AlgebraElement, Channel, Functional, PositiveMap, StarAlgebra};
use crate::category::{
    check_functor_laws, compose_functors, CatMorphism, FunctorMap, LazyCategory, MorHandle, NatTransMap, ObjHandle, SamplerConfig,
};
use crate::error::{Error, Result};
use crate::pattern::{check_chdv_morphism, check_pattern, chdv_compose, chdv_distance, ChdvMorphism, CtxFunctor, DynCat, DynamicalPattern};
use crate::report::LawReport;

pub type ContextCategory = LazyCategory<MorHandle>;

/// Observables per algebra used by the sampled theorem checks.
const MAX_OBSERVABLES: usize = 8;

/// A functor from a context category into Chdv.
#[derive(Clone)]
pub struct Species {
    pub label: String,
    pub map: FunctorMap<MorHandle, ChdvMorphism>,
}

impl fmt::Debug for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Species({} over {})", self.label, self.map.source.name())
    }
}

impl Species {
    pub fn new(label: impl Into<String>, map: FunctorMap<MorHandle, ChdvMorphism>) -> Self {
        Species { label: label.into(), map }
    }

    pub fn ctx(&self) -> &ContextCategory {
        &self.map.source
    }

    pub fn pattern(&self, m: &ObjHandle) -> DynamicalPattern {
        self.map.obj(m)
    }

    pub fn at_mor(&self, phi: &MorHandle) -> ChdvMorphism {
        self.map.mor(phi)
    }

    pub fn a1(&self, phi: &MorHandle) -> CtxFunctor {
        self.at_mor(phi).f
    }

    pub fn a2(&self, phi: &MorHandle, x: &ObjHandle) -> Channel {
        self.at_mor(phi).channel(x)
    }

    pub fn a3(&self, phi: &MorHandle, x: &ObjHandle) -> PositiveMap {
        self.at_mor(phi).device(x)
    }

    /// `a∘y` for a functor `y` into the context category.
    pub fn pullback(&self, y: &CtxFunctor) -> Result<Species> {
        Ok(Species::new(format!("{}∘{}", self.label, y.name), compose_functors(&self.map, y)?))
    }
}

/// Functoriality into Chdv, each sampled pattern, and each sampled `a(φ)`.
pub fn check_species(a: &Species, tol: f64) -> LawReport {
    let mut r = check_functor_laws(&a.map, tol);
    r.law = format!("species {}", a.label);
    for m in &a.ctx().sampler().objects {
        r.absorb(check_pattern(&a.pattern(m), tol));
    }
    for phi in &a.ctx().sampler().morphisms {
        r.absorb(check_chdv_morphism(&a.at_mor(phi), tol));
    }
    r
}

fn self_adjoint(alg: &StarAlgebra, a: &AlgebraElement) -> Result<()> {
    if alg.is_self_adjoint(a, 1e-10) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{} is not self-adjoint in {}", a.describe(), alg.label())))
    }
}

/// `g ↦ ψ(τ(g)A)` on `G(x, y)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub pattern: DynamicalPattern,
    pub x: ObjHandle,
    pub y: ObjHandle,
    pub psi: Functional,
    pub obs: AlgebraElement,
}

impl Trajectory {
    pub fn at(&self, g: &MorHandle) -> Result<f64> {
        if g.dom.id != self.x.id || g.cod.id != self.y.id {
            return Err(Error::CompositionDomain(format!("{} is not in G({}, {})", g.label(), self.x.id, self.y.id)));
        }
        let v = self.psi.apply(&self.pattern.dynamics(g).apply(&self.obs)?)?;
        Ok(v.re)
    }
}

pub fn trajectory(a: &Species, m: &ObjHandle, x: &ObjHandle, y: &ObjHandle, psi: Functional, obs: AlgebraElement) -> Result<Trajectory> {
    let pattern = a.pattern(m);
    self_adjoint(&pattern.algebra(x), &obs)?;
    let ay = pattern.algebra(y);
    if !psi.is_positive_on(&ay, 1e-10) {
        return Err(Error::Precondition(format!("{} is not positive on {}", psi.describe(), ay.label())));
    }
    Ok(Trajectory { pattern, x: x.clone(), y: y.clone(), psi, obs })
}

/// `l ↦ J(ω)(τ(l)e) / ω(1)` on `G(u, v)`.
#[derive(Debug, Clone)]
pub struct PropensityTrajectory {
    pub pattern: DynamicalPattern,
    pub u: ObjHandle,
    pub v: ObjHandle,
    pub state: Functional,
    pub strength: f64,
    pub effect: AlgebraElement,
}

impl PropensityTrajectory {
    pub fn at(&self, l: &MorHandle) -> Result<f64> {
        if l.dom.id != self.u.id || l.cod.id != self.v.id {
            return Err(Error::CompositionDomain(format!("{} is not in G({}, {})", l.label(), self.u.id, self.v.id)));
        }
        Ok(self.state.apply(&self.pattern.dynamics(l).apply(&self.effect)?)?.re / self.strength)
    }

    /// The unnormalized trajectory `𝔣_{(J(ω), e)}`.
    pub fn unnormalized(&self) -> Trajectory {
        Trajectory { pattern: self.pattern.clone(), x: self.u.clone(), y: self.v.clone(), psi: self.state.clone(), obs: self.effect.clone() }
    }
}

pub fn propensity_trajectory(
    j: &Channel,
    omega: &Functional,
    e: &AlgebraElement,
    b: &Species,
    n: &ObjHandle,
    u: &ObjHandle,
    v: &ObjHandle,
) -> Result<PropensityTrajectory> {
    let s = omega.strength();
    if !(s > 0.0) {
        return Err(Error::ZeroStrength);
    }
    let pattern = b.pattern(n);
    let au = pattern.algebra(u);
    if !au.is_effect(e, crate::algebra::ops::EFFECT_TOL) {
        return Err(Error::Precondition(format!("{} is not an effect of {}", e.describe(), au.label())));
    }
    let state = j.apply(omega)?;
    Ok(PropensityTrajectory { pattern, u: u.clone(), v: v.clone(), state, strength: s, effect: e.clone() })
}

/// Outcome of an approximate membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub found: bool,
    pub nearest: f64,
    pub ambiguous: bool,
}

/// A set of positive functionals on one algebra.
#[derive(Clone)]
pub enum FunctionalFamily {
    /// Every positive functional; sampled by the algebra's own sampler.
    AllPositive(StarAlgebra),
    Finite { alg: StarAlgebra, members: Vec<Functional> },
    /// `{ψ∘map : ψ ∈ base}`.
    Image { map: PositiveMap, base: Box<FunctionalFamily> },
}

impl fmt::Debug for FunctionalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalFamily::AllPositive(a) => write!(f, "AllPositive({})", a.label()),
            FunctionalFamily::Finite { alg, members } => write!(f, "Finite({}, {} members)", alg.label(), members.len()),
            FunctionalFamily::Image { map, base } => write!(f, "Image({}, {:?})", map.label_str(), base),
        }
    }
}

impl FunctionalFamily {
    pub fn alg(&self) -> StarAlgebra {
        match self {
            FunctionalFamily::AllPositive(a) => a.clone(),
            FunctionalFamily::Finite { alg, .. } => alg.clone(),
            FunctionalFamily::Image { map, .. } => map.source().clone(),
        }
    }

    pub fn members(&self) -> Vec<Functional> {
        match self {
            FunctionalFamily::AllPositive(a) => a.sample_functionals().to_vec(),
            FunctionalFamily::Finite { members, .. } => members.clone(),
            FunctionalFamily::Image { map, base } => base.members().iter().filter_map(|p| map.dual_apply(p).ok()).collect(),
        }
    }

    fn nearest(&self, chi: &Functional, tol: f64) -> Membership {
        let alg = self.alg();
        let ds: Vec<f64> = self.members().iter().map(|m| m.distance(chi, &alg)).collect();
        let nearest = ds.iter().copied().fold(f64::INFINITY, f64::min);
        let close = ds.iter().filter(|d| **d <= tol / 10.0).count();
        Membership { found: nearest <= tol, nearest, ambiguous: close > 1 }
    }

    pub fn contains(&self, chi: &Functional, tol: f64) -> Membership {
        match self {
            FunctionalFamily::AllPositive(a) => {
                let ok = chi.is_positive_on(a, tol);
                Membership { found: ok, nearest: if ok { 0.0 } else { f64::INFINITY }, ambiguous: false }
            }
            FunctionalFamily::Finite { .. } => self.nearest(chi, tol),
            FunctionalFamily::Image { map, base } => {
                if let Some(pre) = map.dual_preimage(chi) {
                    let back = map.dual_apply(&pre).map(|f| f.distance(chi, map.source())).unwrap_or(f64::INFINITY);
                    let inner = base.contains(&pre, tol);
                    if back <= tol && inner.found {
                        return Membership { found: true, nearest: back.max(inner.nearest), ambiguous: inner.ambiguous };
                    }
                }
                self.nearest(chi, tol)
            }
        }
    }
}

type FamilyFn = Arc<dyn Fn(&ObjHandle, &ObjHandle) -> FunctionalFamily + Send + Sync>;

/// `(𝔖, ℛ)`: sub-dynamical categories and functional families per context.
#[derive(Clone)]
pub struct ExperimentalSetting {
    pub label: String,
    pub r: BTreeMap<String, DynCat>,
    s: FamilyFn,
    pub complete: bool,
    pub star: bool,
}

impl fmt::Debug for ExperimentalSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExperimentalSetting({}, contexts {:?})", self.label, self.r.keys().collect::<Vec<_>>())
    }
}

impl ExperimentalSetting {
    pub fn new(
        label: impl Into<String>,
        r: BTreeMap<String, DynCat>,
        s: impl Fn(&ObjHandle, &ObjHandle) -> FunctionalFamily + Send + Sync + 'static,
        complete: bool,
        star: bool,
    ) -> Self {
        ExperimentalSetting { label: label.into(), r, s: Arc::new(s), complete, star }
    }

    pub fn r_at(&self, m: &ObjHandle) -> Option<&DynCat> {
        self.r.get(&m.id)
    }

    /// `𝔖_M(t)`.
    pub fn s_at(&self, m: &ObjHandle, t: &ObjHandle) -> FunctionalFamily {
        (self.s)(m, t)
    }

    /// The same setting with `𝔖_M(t)` replaced for one `(M, t)`.
    pub fn with_family(&self, m: &ObjHandle, t: &ObjHandle, fam: FunctionalFamily) -> ExperimentalSetting {
        let (mid, tid) = (m.id.clone(), t.id.clone());
        let old = self.s.clone();
        let mut out = self.clone();
        out.s = Arc::new(move |a: &ObjHandle, b: &ObjHandle| if a.id == mid && b.id == tid { fam.clone() } else { old(a, b) });
        out
    }
}

/// `(𝔓ᵃ, Gᵃ)`: the full dynamical categories and all positive functionals.
pub fn standard_setting(a: &Species) -> ExperimentalSetting {
    let r = a.ctx().objects().iter().map(|m| (m.id.clone(), a.pattern(m).g().clone())).collect();
    let a2 = a.clone();
    ExperimentalSetting::new(
        format!("std[{}]", a.label),
        r,
        move |m, t| FunctionalFamily::AllPositive(a2.pattern(m).algebra(t)),
        true,
        true,
    )
}

/// Elements `b` of the test basis with `b*b ≤ 1`.
pub fn unit_ball_samples(alg: &StarAlgebra) -> Vec<AlgebraElement> {
    alg.test_basis().iter().filter(|b| alg.in_unit_ball(b, 1e-12)).cloned().collect()
}

/// Effects `b*b` built from the unit-ball samples, plus the unit.
pub fn effect_samples(alg: &StarAlgebra) -> Vec<AlgebraElement> {
    let mut out = vec![alg.unit()];
    out.extend(unit_ball_samples(alg).iter().map(|b| b.square_norm()));
    out.truncate(MAX_OBSERVABLES);
    out
}

fn observables(alg: &StarAlgebra) -> Vec<AlgebraElement> {
    let mut o = alg.sample_observables();
    o.truncate(MAX_OBSERVABLES);
    o
}

fn record_membership(r: &mut LawReport, m: Membership, tol: f64, describe: impl FnOnce() -> (Vec<String>, Vec<String>, String, String)) {
    if m.ambiguous {
        r.warn("ambiguous nearest match within tol/10");
    }
    r.record(if m.found { m.nearest.min(tol) } else { f64::INFINITY }, tol, describe);
}

fn ctx_object(a: &Species, id: &str) -> Option<ObjHandle> {
    a.ctx().objects().iter().find(|o| o.id == id).cloned()
}

/// The clauses of an experimental setting, one report each: subcategory,
/// positivity, functor restriction, device transport, dynamics transport,
/// and the complete / Exp* clauses when the flags claim them.
pub fn check_setting_clauses(e: &ExperimentalSetting, a: &Species, tol: f64) -> Vec<LawReport> {
    let mut c1 = LawReport::new(format!("{}: clause 1 (subcategory)", e.label));
    let mut c2 = LawReport::new(format!("{}: clause 2 (positive functionals)", e.label));
    let mut c3a = LawReport::new(format!("{}: clause 3a (functor restriction)", e.label));
    let mut c3b = LawReport::new(format!("{}: clause 3b (device transport)", e.label));
    let mut c4 = LawReport::new(format!("{}: clause 4 (dynamics transport)", e.label));
    let mut cc = LawReport::new(format!("{}: completeness", e.label));
    let mut cs = LawReport::new(format!("{}: Exp*", e.label));

    for (mid, rm) in &e.r {
        let Some(m) = ctx_object(a, mid) else {
            c1.record_bool(false, || (vec![mid.clone()], vec![], "context".into(), "object of the context category".into()));
            continue;
        };
        let p = a.pattern(&m);
        let g = p.g();
        let s = rm.sampler();
        for x in &s.objects {
            c1.record_bool(g.contains_object(x), || (vec![mid.clone(), x.id.clone()], vec![], "object of R".into(), format!("object of {}", g.name())));
            let id = rm.identity(x);
            let d = rm.hom_distance(&id);
            c1.record(d, tol, || (vec![mid.clone(), x.id.clone()], vec![id.label()], "identity".into(), "in R".into()));
            let alg = p.algebra(x);
            for psi in e.s_at(&m, x).members() {
                let ok = psi.is_positive_on(&alg, tol);
                c2.record_bool(ok, || (vec![mid.clone(), x.id.clone()], vec![], psi.describe(), format!("positive on {}", alg.label())));
            }
        }
        for h in &s.morphisms {
            let d = g.hom_distance(h);
            c1.record(d, tol, || (vec![mid.clone()], vec![h.label()], "morphism of R".into(), format!("morphism of {}", g.name())));
        }
        for (u, v) in &s.pairs {
            let d = rm.compose(u, v).map(|w| rm.hom_distance(&w)).unwrap_or(f64::INFINITY);
            c1.record(d, tol, || (vec![mid.clone()], vec![u.label(), v.label()], "composite".into(), "in R".into()));
        }
        // clause 4: τ†(g) 𝔖(z) ⊆ 𝔖(y)
        for h in &s.morphisms {
            let (y, z) = (h.dom.clone(), h.cod.clone());
            let tau = p.dynamics(h);
            let target = e.s_at(&m, &y);
            for psi in e.s_at(&m, &z).members() {
                let out = tau.dual_apply(&psi);
                let mem = out.as_ref().map(|o| target.contains(o, tol)).unwrap_or(Membership { found: false, nearest: f64::INFINITY, ambiguous: false });
                record_membership(&mut c4, mem, tol, || {
                    (vec![mid.clone(), y.id.clone(), z.id.clone()], vec![h.label()], format!("τ†(g)({})", psi.describe()), format!("𝔖({})", y.id))
                });
            }
        }
        if e.star {
            for t in &s.objects {
                let alg = p.algebra(t);
                let fam = e.s_at(&m, t);
                for x in unit_ball_samples(&alg) {
                    let d = PositiveMap::delta(&alg, &x);
                    for psi in fam.members() {
                        let mem = d.dual_apply(&psi).map(|o| fam.contains(&o, tol)).unwrap_or(Membership { found: false, nearest: f64::INFINITY, ambiguous: false });
                        record_membership(&mut cs, mem, tol, || {
                            (vec![mid.clone(), t.id.clone()], vec![x.describe()], format!("γ†(a)({})", psi.describe()), format!("𝔖({})", t.id))
                        });
                    }
                }
            }
        }
    }

    for phi in &a.ctx().sampler().morphisms {
        let (m, n) = (phi.dom.clone(), phi.cod.clone());
        let (Some(rm), Some(rn)) = (e.r_at(&m), e.r_at(&n)) else { continue };
        let chdv = a.at_mor(phi);
        let f = chdv.functor();
        for u in &rn.sampler().objects {
            let fu = f.obj(u);
            c3a.record_bool(rm.contains_object(&fu), || (vec![n.id.clone(), u.id.clone()], vec![phi.label()], format!("a₁(φ)({}) = {}", u.id, fu.id), "object of R_M".into()));
            let target = e.s_at(&m, &fu);
            let dev = chdv.device(u);
            let ch = chdv.channel(u);
            for psi in e.s_at(&n, u).members() {
                let out = dev.dual_apply(&psi);
                let mem = out.as_ref().map(|o| target.contains(o, tol)).unwrap_or(Membership { found: false, nearest: f64::INFINITY, ambiguous: false });
                record_membership(&mut c3b, mem, tol, || (vec![n.id.clone(), u.id.clone()], vec![phi.label()], format!("a₃†(φ)({})", psi.describe()), format!("𝔖_M({})", fu.id)));
                if e.complete {
                    let out = ch.apply(&psi);
                    let mem = out.as_ref().map(|o| target.contains(o, tol)).unwrap_or(Membership { found: false, nearest: f64::INFINITY, ambiguous: false });
                    record_membership(&mut cc, mem, tol, || (vec![n.id.clone(), u.id.clone()], vec![phi.label()], format!("a₂(φ)({})", psi.describe()), format!("𝔖_M({})", fu.id)));
                }
            }
        }
        for h in &rn.sampler().morphisms {
            let fh = f.mor(h);
            let d = rm.hom_distance(&fh);
            c3a.record(d, tol, || (vec![n.id.clone()], vec![phi.label(), h.label()], fh.label(), "morphism of R_M".into()));
        }
    }
    let mut out = vec![c1, c2, c3a, c3b, c4];
    if e.complete {
        out.push(cc);
    }
    if e.star {
        out.push(cs);
    }
    out
}

pub fn check_setting(e: &ExperimentalSetting, a: &Species, tol: f64) -> LawReport {
    LawReport::merged(format!("experimental setting {}", e.label), check_setting_clauses(e, a, tol))
}

type ComponentFn = Arc<dyn Fn(&ObjHandle) -> ChdvMorphism + Send + Sync>;

/// A natural transformation `T: a ⇒ b` between species, by components.
#[derive(Clone)]
pub struct Connector {
    pub label: String,
    pub src: Species,
    pub dst: Species,
    comp: ComponentFn,
}

impl fmt::Debug for Connector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Connector({}: {} => {})", self.label, self.src.label, self.dst.label)
    }
}

impl Connector {
    pub fn new(label: impl Into<String>, src: &Species, dst: &Species, comp: impl Fn(&ObjHandle) -> ChdvMorphism + Send + Sync + 'static) -> Result<Self> {
        if src.ctx().name() != dst.ctx().name() {
            return Err(Error::FunctorMismatch(format!("species over {} and {}", src.ctx().name(), dst.ctx().name())));
        }
        Ok(Connector { label: label.into(), src: src.clone(), dst: dst.clone(), comp: Arc::new(comp) })
    }

    pub fn identity(a: &Species) -> Self {
        let a1 = a.clone();
        Connector::new(format!("1[{}]", a.label), a, a, move |m| ChdvMorphism::unit(&a1.pattern(m))).expect("same context")
    }

    /// `T(M)`.
    pub fn at(&self, m: &ObjHandle) -> ChdvMorphism {
        (self.comp)(m)
    }

    /// The same connector with one device component replaced.
    pub fn with_device(&self, m: &ObjHandle, device: impl Fn(&ObjHandle) -> PositiveMap + Send + Sync + 'static) -> Result<Connector> {
        let target = m.id.clone();
        let base = self.clone();
        let device = Arc::new(device);
        let fixed = ChdvMorphism::new(
            &self.src.pattern(m),
            &self.dst.pattern(m),
            self.at(m).f.clone(),
            "H'",
            {
                let d = device.clone();
                move |x| dagger(&d(x))
            },
            "T'",
            move |x| device(x),
        )?;
        Connector::new(format!("{}'", self.label), &self.src, &self.dst, move |x| if x.id == target { fixed.clone() } else { base.at(x) })
    }
}

/// `T∘S` with components `T(M)∘S(M)`.
pub fn compose_connectors(t: &Connector, s: &Connector) -> Result<Connector> {
    if s.dst.label != t.src.label {
        return Err(Error::CompositionDomain(format!("{} ends at {} but {} starts at {}", s.label, s.dst.label, t.label, t.src.label)));
    }
    let (t1, s1) = (t.clone(), s.clone());
    Connector::new(format!("{}∘{}", t.label, s.label), &s.src, &t.dst, move |m| chdv_compose(&t1.at(m), &s1.at(m)).expect("components share endpoints"))
}

/// `T∗L` for `L: x ⇒ y` between functors into the context category:
/// component `T(y G)∘a(L G)`, from `a∘x` to `b∘y`.
pub fn connector_star(t: &Connector, l: &NatTransMap<MorHandle, MorHandle>) -> Result<Connector> {
    let ax = t.src.pullback(&l.source)?;
    let by = t.dst.pullback(&l.target)?;
    let (t1, l1, a) = (t.clone(), l.clone(), t.src.clone());
    Connector::new(format!("{}∗{}", t.label, l.name), &ax, &by, move |g| {
        chdv_compose(&t1.at(&l1.target.obj(g)), &a.at_mor(&l1.at(g))).expect("Godement components compose")
    })
}

/// Components are Chdv morphisms and the square `b(φ)∘T(M) = T(N)∘a(φ)`
/// holds on sampled `φ`.
pub fn check_connector(t: &Connector, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("connector {}", t.label));
    for m in &t.src.ctx().sampler().objects {
        r.absorb(check_chdv_morphism(&t.at(m), tol));
    }
    for phi in &t.src.ctx().sampler().morphisms {
        let (m, n) = (phi.dom.clone(), phi.cod.clone());
        let lhs = chdv_compose(&t.dst.at_mor(phi), &t.at(&m));
        let rhs = chdv_compose(&t.at(&n), &t.src.at_mor(phi));
        let d = match (&lhs, &rhs) {
            (Ok(x), Ok(y)) => chdv_distance(x, y, tol),
            _ => f64::INFINITY,
        };
        r.record(d, tol, || (vec![m.id.clone(), n.id.clone()], vec![phi.label()], "b(φ)∘T(M)".into(), "T(N)∘a(φ)".into()));
    }
    r
}

/// `T` is a link from `eb` to `ea`: the four clauses on sampled data.
pub fn check_link(t: &Connector, eb: &ExperimentalSetting, ea: &ExperimentalSetting, tol: f64) -> LawReport {
    let (a, b) = (&t.src, &t.dst);
    let mut c1 = LawReport::new(format!("link {}: clause 1", t.label));
    let mut c2 = LawReport::new(format!("link {}: clause 2", t.label));
    let mut c3 = LawReport::new(format!("link {}: clause 3", t.label));
    let mut c4 = LawReport::new(format!("link {}: clause 4", t.label));
    for (nid, rbn) in &eb.r {
        let Some(n) = ctx_object(b, nid) else { continue };
        let tn = t.at(&n);
        let Some(ran) = ea.r_at(&n) else {
            c1.record_bool(false, || (vec![nid.clone()], vec![], "R^a_N".into(), "present".into()));
            continue;
        };
        for z in &rbn.sampler().objects {
            let tz = tn.f.obj(z);
            c1.record_bool(ran.contains_object(&tz), || (vec![nid.clone(), z.id.clone()], vec![], tz.id.clone(), "object of R^a_N".into()));
            let dev = tn.device(z);
            let target = ea.s_at(&n, &tz);
            for psi in eb.s_at(&n, z).members() {
                let mem = dev.dual_apply(&psi).map(|o| target.contains(&o, tol)).unwrap_or(Membership { found: false, nearest: f64::INFINITY, ambiguous: false });
                record_membership(&mut c2, mem, tol, || (vec![nid.clone(), z.id.clone()], vec![], format!("T₃†({})", psi.describe()), format!("𝔖^a({})", tz.id)));
            }
        }
        for g in &rbn.sampler().morphisms {
            let tg = tn.f.mor(g);
            let d = ran.hom_distance(&tg);
            c1.record(d, tol, || (vec![nid.clone()], vec![g.label()], tg.label(), "morphism of R^a_N".into()));
        }
    }
    for phi in &a.ctx().sampler().morphisms {
        let (m, n) = (phi.dom.clone(), phi.cod.clone());
        let Some(rbn) = eb.r_at(&n) else { continue };
        let (tm, tn, aphi, bphi) = (t.at(&m), t.at(&n), a.at_mor(phi), b.at_mor(phi));
        let (pa_n, pb_m) = (a.pattern(&n), b.pattern(&m));
        for g in &rbn.sampler().morphisms {
            let (y, z) = (g.dom.clone(), g.cod.clone());
            let ty = tn.f.obj(&y);
            let by = bphi.f.obj(&y);
            let lhs = tn.device(&z).compose(&pa_n.dynamics(&tn.f.mor(g))).and_then(|x| x.compose(&aphi.device(&ty)));
            let rhs = bphi.device(&z).compose(&pb_m.dynamics(&bphi.f.mor(g))).and_then(|x| x.compose(&tm.device(&by)));
            let d = match (&lhs, &rhs) {
                (Ok(p), Ok(q)) => p.distance(q),
                _ => f64::INFINITY,
            };
            c3.record(d, tol, || {
                (vec![m.id.clone(), n.id.clone(), y.id.clone(), z.id.clone()], vec![phi.label(), g.label()], "T₃(N)∘τ_a(T₁g)∘a₃(φ)".into(), "b₃(φ)∘τ_b(b₁g)∘T₃(M)".into())
            });
            let lhs = tm
                .channel(&by)
                .compose(&dagger(&pb_m.dynamics(&bphi.f.mor(g))))
                .and_then(|x| x.compose(&bphi.channel(&z)));
            let rhs = aphi
                .channel(&ty)
                .compose(&dagger(&pa_n.dynamics(&tn.f.mor(g))))
                .and_then(|x| x.compose(&tn.channel(&z)));
            let d = match (&lhs, &rhs) {
                (Ok(p), Ok(q)) => p.distance(q),
                _ => f64::INFINITY,
            };
            c4.record(d, tol, || {
                (vec![m.id.clone(), n.id.clone(), y.id.clone(), z.id.clone()], vec![phi.label(), g.label()], "T₂(M)∘τ_b(b₁g)†∘b₂(φ)".into(), "a₂(φ)∘τ_a(T₁g)†∘T₂(N)".into())
            });
        }
    }
    LawReport::merged(format!("link {} from {} to {}", t.label, eb.label, ea.label), [c1, c2, c3, c4])
}

/// Per-context object maps `s_M` from `T₁ᵒ(M)`-images back to `Obj(R_M)`.
#[derive(Debug, Clone, Default)]
pub struct Section {
    pub label: String,
    maps: BTreeMap<String, BTreeMap<String, ObjHandle>>,
}

impl Section {
    pub fn new(label: impl Into<String>) -> Self {
        Section { label: label.into(), maps: BTreeMap::new() }
    }

    pub fn insert(&mut self, ctx: &str, from: &ObjHandle, to: ObjHandle) {
        self.maps.entry(ctx.to_string()).or_default().insert(from.id.clone(), to);
    }

    pub fn get(&self, ctx: &str, x: &ObjHandle) -> Option<&ObjHandle> {
        self.maps.get(ctx).and_then(|m| m.get(&x.id))
    }

    pub fn domain(&self, ctx: &str) -> Vec<String> {
        self.maps.get(ctx).map(|m| m.keys().cloned().collect()).unwrap_or_default()
    }

    /// `self∘inner`, defined where `inner` lands in the domain of `self`.
    pub fn after(&self, inner: &Section) -> Section {
        let mut out = Section::new(format!("{}∘{}", self.label, inner.label));
        for (ctx, m) in &inner.maps {
            for (k, v) in m {
                if let Some(w) = self.get(ctx, v) {
                    out.maps.entry(ctx.clone()).or_default().insert(k.clone(), w.clone());
                }
            }
        }
        out
    }
}

/// `T₁ᵒ(M)⁻¹` on the image of `Obj(R_M)`, when `T₁ᵒ(M)` is injective there.
pub fn projection_section(e: &ExperimentalSetting, t: &Connector) -> Result<Section> {
    let mut s = Section::new(format!("proj[{}]", t.label));
    for (mid, rm) in &e.r {
        let m = ctx_object(&t.src, mid).ok_or_else(|| Error::Config(format!("setting context {mid} is not in {}", t.src.ctx().name())))?;
        let f = t.at(&m).f;
        for u in rm.objects() {
            let x = f.obj(u);
            if let Some(prev) = s.get(mid, &x) {
                if prev.id != u.id {
                    return Err(Error::NonInjective(prev.id.clone(), u.id.clone()));
                }
            }
            s.insert(mid, &x, u.clone());
        }
    }
    Ok(s)
}

/// `s ∈ Γ(E, T)`: `s_M∘T₁ᵒ(M) = 1` and `b₁ᵒ(φ)∘s_N = s_M∘a₁ᵒ(φ)`.
pub fn check_section(s: &Section, e: &ExperimentalSetting, t: &Connector) -> LawReport {
    let mut r = LawReport::new(format!("section {} in Γ({}, {})", s.label, e.label, t.label));
    for (mid, rm) in &e.r {
        let Some(m) = ctx_object(&t.src, mid) else { continue };
        let f = t.at(&m).f;
        for u in rm.objects() {
            let back = s.get(mid, &f.obj(u));
            r.record_bool(back.map(|b| b.id == u.id).unwrap_or(false), || {
                (vec![mid.clone(), u.id.clone()], vec![], format!("s(T₁ᵒ {}) = {:?}", u.id, back.map(|b| b.id.clone())), u.id.clone())
            });
        }
    }
    for phi in &t.src.ctx().sampler().morphisms {
        let (m, n) = (phi.dom.clone(), phi.cod.clone());
        let (Some(_), Some(rn)) = (e.r_at(&m), e.r_at(&n)) else { continue };
        let (tn, a1, b1) = (t.at(&n).f, t.src.a1(phi), t.dst.a1(phi));
        for u in rn.objects() {
            let x = tn.obj(u);
            let lhs = s.get(&n.id, &x).map(|v| b1.obj(v).id);
            let rhs = s.get(&m.id, &a1.obj(&x)).map(|v| v.id.clone());
            r.record_bool(lhs.is_some() && lhs == rhs, || (vec![m.id.clone(), n.id.clone(), x.id.clone()], vec![phi.label()], format!("b₁ᵒ(φ)∘s_N = {lhs:?}"), format!("s_M∘a₁ᵒ(φ) = {rhs:?}")));
        }
    }
    r
}

/// `T[E, s]`, a setting of the source species of `T`.
pub fn charge(t: &Connector, e: &ExperimentalSetting, s: &Section) -> Result<ExperimentalSetting> {
    charge_with(t, e, s, SamplerConfig::default())
}

pub fn charge_with(t: &Connector, e: &ExperimentalSetting, s: &Section, cfg: SamplerConfig) -> Result<ExperimentalSetting> {
    let valid = check_section(s, e, t);
    if !valid.passed() {
        let v = &valid.violations[0];
        return Err(Error::InvalidSection(format!("{}: {} vs {}", v.objects.join(","), v.lhs, v.rhs)));
    }
    let mut r = BTreeMap::new();
    for (mid, rm) in &e.r {
        let m = ctx_object(&t.src, mid).expect("checked by the section");
        let tm = t.at(&m);
        let f = tm.f.clone();
        let mut objs: Vec<ObjHandle> = Vec::new();
        for u in rm.objects() {
            let x = f.obj(u);
            if !objs.iter().any(|o| o.id == x.id) {
                objs.push(x);
            }
        }
        let (rm2, s2, ctx) = (rm.clone(), s.clone(), mid.clone());
        let hom = move |u: &ObjHandle, v: &ObjHandle| -> Vec<MorHandle> {
            match (s2.get(&ctx, u), s2.get(&ctx, v)) {
                (Some(a), Some(b)) => rm2.hom(a, b).iter().map(|g| f.mor(g)).collect(),
                _ => Vec::new(),
            }
        };
        let g = t.src.pattern(&m).g().clone();
        r.insert(mid.clone(), g.restrict(format!("{}[{}]", t.label, rm.name()), objs, hom, cfg));
    }
    let (t2, e2, s2) = (t.clone(), e.clone(), s.clone());
    Ok(ExperimentalSetting::new(
        format!("{}[{}]", t.label, e.label),
        r,
        move |m, x| match s2.get(&m.id, x) {
            Some(z) => FunctionalFamily::Image { map: t2.at(m).device(z), base: Box::new(e2.s_at(m, z)) },
            None => FunctionalFamily::Finite { alg: t2.src.pattern(m).algebra(x), members: Vec::new() },
        },
        e.complete,
        e.star,
    ))
}

/// The identity `γ†(a)∘T₃† = T₃†∘γ†(T₃ a)` behind Exp* preservation, on
/// sampled unit-ball `a` and basis `b`, plus `γ†(T₃ a)ψ ∈ 𝔖(z)`.
pub fn charge_star_check(t: &Connector, e: &ExperimentalSetting, s: &Section, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("Exp* preservation by {}", t.label));
    for (mid, rm) in &e.r {
        let Some(m) = ctx_object(&t.src, mid) else { continue };
        let tm = t.at(&m);
        for z in rm.objects() {
            let x = tm.f.obj(z);
            if s.get(mid, &x).map(|v| v.id != z.id).unwrap_or(true) {
                continue;
            }
            let dev = tm.device(z);
            let alg = dev.source().clone();
            let fam = e.s_at(&m, z);
            let members = fam.members();
            for a in unit_ball_samples(&alg) {
                let Ok(ta) = dev.apply(&a) else { continue };
                for psi in &members {
                    for b in alg.test_basis() {
                        let lhs = a.adjoint().mul(b).and_then(|x| x.mul(&a)).and_then(|x| dev.apply(&x)).and_then(|x| psi.apply(&x));
                        let rhs = dev.apply(b).and_then(|tb| ta.adjoint().mul(&tb)).and_then(|x| x.mul(&ta)).and_then(|x| psi.apply(&x));
                        let d = match (lhs, rhs) {
                            (Ok(p), Ok(q)) => (p - q).norm(),
                            _ => f64::INFINITY,
                        };
                        r.record(d, tol, || (vec![mid.clone(), z.id.clone()], vec![a.describe(), b.describe()], "ψ(T₃(a*ba))".into(), "ψ(T₃(a)*T₃(b)T₃(a))".into()));
                    }
                    if e.star {
                        let mem = PositiveMap::delta(dev.target(), &ta).dual_apply(psi).map(|o| fam.contains(&o, tol)).unwrap_or(Membership {
                            found: false,
                            nearest: f64::INFINITY,
                            ambiguous: false,
                        });
                        record_membership(&mut r, mem, tol, || (vec![mid.clone(), z.id.clone()], vec![a.describe()], "γ†(T₃ a)ψ".into(), format!("𝔖({})", z.id)));
                    }
                }
            }
        }
    }
    r
}

/// Equiformity in value and propensity form over sampled
/// `(φ: M → N, g ∈ R_N(y, z), ψ ∈ 𝔖_N(z), A)`, after validating `s ∈ Γ(E, T)`.
pub fn equiformity_check(t: &Connector, e: &ExperimentalSetting, s: &Section, tol: f64) -> LawReport {
    let mut sec = check_section(s, e, t);
    sec.law = "section precondition".into();
    let mut val = LawReport::new(format!("equiformity of {} (value form)", t.label));
    let mut prop = LawReport::new(format!("equiformity of {} (propensity form)", t.label));
    for phi in &t.src.ctx().sampler().morphisms {
        let (m, n) = (phi.dom.clone(), phi.cod.clone());
        let Some(rn) = e.r_at(&n) else { continue };
        let (tm, tn, aphi, bphi) = (t.at(&m), t.at(&n), t.src.at_mor(phi), t.dst.at_mor(phi));
        let (pa_n, pb_m) = (t.src.pattern(&n), t.dst.pattern(&m));
        for g in &rn.sampler().morphisms {
            let (y, z) = (&g.dom, &g.cod);
            let by = bphi.f.obj(y);
            // 𝔣^a side: state T₃†(N)(z)ψ, observable τ_a(T₁g)(a₃(φ)(T₁y)A)
            let lmap = pa_n.dynamics(&tn.f.mor(g)).compose(&aphi.device(&tn.f.obj(y)));
            // 𝔣^b side: state b₃†(φ)(z)ψ, observable τ_b(b₁g)(T₃(M)(b₁y)A)
            let rmap = pb_m.dynamics(&bphi.f.mor(g)).compose(&tm.device(&by));
            let (ldev, rdev) = (tn.device(z), bphi.device(z));
            let alg = t.src.pattern(&m).algebra(&tm.f.obj(&by));
            let obs = observables(&alg);
            let effects = effect_samples(&alg);
            let where_ = || (vec![m.id.clone(), n.id.clone(), y.id.clone(), z.id.clone()], vec![phi.label(), g.label()]);
            let (lmap, rmap) = match (lmap, rmap) {
                (Ok(l), Ok(r)) => (l, r),
                (l, r) => {
                    val.record_bool(false, || {
                        let (o, ms) = where_();
                        (o, ms, format!("{:?}", l.err()), format!("{:?}", r.err()))
                    });
                    continue;
                }
            };
            for psi in e.s_at(&n, z).members() {
                let (Ok(ls), Ok(rs)) = (ldev.dual_apply(&psi), rdev.dual_apply(&psi)) else {
                    val.record_bool(false, || {
                        let (o, ms) = where_();
                        (o, ms, "T₃†(N)(z)ψ".into(), "b₃†(φ)(z)ψ".into())
                    });
                    continue;
                };
                let side = |a: &AlgebraElement| -> (f64, f64) {
                    let l = lmap.apply(a).and_then(|x| ls.apply(&x)).map(|v| v.re).unwrap_or(f64::NAN);
                    let r = rmap.apply(a).and_then(|x| rs.apply(&x)).map(|v| v.re).unwrap_or(f64::INFINITY);
                    (l, r)
                };
                for a in &obs {
                    let (l, r) = side(a);
                    val.record(l - r, tol, || {
                        let (o, ms) = where_();
                        (o, ms, format!("{l}"), format!("{r}"))
                    });
                }
                let w = psi.strength();
                if !(w > 0.0) {
                    continue;
                }
                for eff in &effects {
                    let (l, r) = side(eff);
                    prop.record((l - r) / w, tol, || {
                        let (o, ms) = where_();
                        (o, ms, format!("{}", l / w), format!("{}", r / w))
                    });
                }
            }
        }
    }
    LawReport::merged(format!("equiformity of {}", t.label), [sec, val, prop])
}

/// `E ≤ E'`: object, hom-set and functional inclusions on sampled data.
pub fn setting_leq_report(e: &ExperimentalSetting, e2: &ExperimentalSetting, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("{} ≤ {}", e.label, e2.label));
    for (mid, rm) in &e.r {
        let Some(rm2) = e2.r.get(mid) else {
            r.record_bool(false, || (vec![mid.clone()], vec![], "R_M".into(), "context missing on the right".into()));
            continue;
        };
        let m = ObjHandle::new(mid.clone(), crate::category::Payload::None);
        for x in rm.objects() {
            r.record_bool(rm2.contains_object(x), || (vec![mid.clone(), x.id.clone()], vec![], "object".into(), format!("object of {}", rm2.name())));
            if !rm2.contains_object(x) {
                continue;
            }
            for y in rm.objects() {
                for h in rm.hom(x, y) {
                    let d = rm2.hom_distance(&h);
                    r.record(d, tol, || (vec![mid.clone()], vec![h.label()], "morphism".into(), format!("morphism of {}", rm2.name())));
                }
            }
            let fam2 = e2.s_at(&m, x);
            for psi in e.s_at(&m, x).members() {
                record_membership(&mut r, fam2.contains(&psi, tol), tol, || (vec![mid.clone(), x.id.clone()], vec![], psi.describe(), format!("{:?}", fam2)));
            }
        }
    }
    r
}

pub fn setting_leq(e: &ExperimentalSetting, e2: &ExperimentalSetting, tol: f64) -> bool {
    setting_leq_report(e, e2, tol).passed()
}

/// Total size of the hom-sets of `R_M` over all object pairs and contexts.
pub fn hom_count(e: &ExperimentalSetting) -> usize {
    e.r.values().map(|rm| rm.objects().iter().map(|x| rm.objects().iter().map(|y| rm.hom(x, y).len()).sum::<usize>()).sum::<usize>()).sum()
}

/// `(T∘S)[Q, r∘q] = S[T[Q, r], q]` with `r`, `q` projection sections, plus
/// `r∘q ∈ Γ(Q, T∘S)` and the composite device formula.
pub fn charge_compose_check(t: &Connector, s: &Connector, q: &ExperimentalSetting, tol: f64) -> Result<LawReport> {
    charge_compose_check_with(t, s, &compose_connectors(t, s)?, q, tol)
}

/// As [`charge_compose_check`], against a claimed composite `ts` of `T` and `S`.
pub fn charge_compose_check_with(t: &Connector, s: &Connector, ts: &Connector, q: &ExperimentalSetting, tol: f64) -> Result<LawReport> {
    let r = projection_section(q, t)?;
    let tq = charge(t, q, &r)?;
    let qs = projection_section(&tq, s)?;
    let lhs = charge(s, &tq, &qs)?;
    let rq = r.after(&qs);
    let mut gamma = check_section(&rq, q, ts);
    gamma.law = "r∘q ∈ Γ(Q, T∘S)".into();
    let rhs = charge(ts, q, &rq)?;
    let mut formula = LawReport::new("composite device formula");
    for m in &ts.src.ctx().sampler().objects {
        let (tm, sm, tsm) = (t.at(m), s.at(m), ts.at(m));
        for y in t.dst.pattern(m).g().sampler().objects.iter() {
            let lhs_map = tsm.device(y);
            let rhs_map = tm.device(y).compose(&sm.device(&tm.f.obj(y)));
            let d = rhs_map.map(|p| p.distance(&lhs_map)).unwrap_or(f64::INFINITY);
            formula.record(d, tol, || (vec![m.id.clone(), y.id.clone()], vec![], "(T∘S)₃(M)(y)".into(), "T₃(M)(y)∘S₃(M)(T₁ᵒ y)".into()));
        }
    }
    let fwd = setting_leq_report(&lhs, &rhs, tol);
    let back = setting_leq_report(&rhs, &lhs, tol);
    Ok(LawReport::merged(format!("charge composition {}∘{}", t.label, s.label), [gamma, formula, fwd, back]))
}

/// `y[Q] = (𝔖∘yᵒ, ℛ∘yᵒ)`, a setting of `b∘y`.
pub fn pullback_setting(y: &CtxFunctor, q: &ExperimentalSetting) -> ExperimentalSetting {
    let mut r = BTreeMap::new();
    for g in y.source.objects() {
        if let Some(rm) = q.r_at(&y.obj(g)) {
            r.insert(g.id.clone(), rm.clone());
        }
    }
    let (y2, q2) = (y.clone(), q.clone());
    ExperimentalSetting::new(format!("{}[{}]", y.name, q.label), r, move |g, t| q2.s_at(&y2.obj(g), t), q.complete, q.star)
}

/// The unique candidate in `Ξ(T, L, s)`, or the reason it is empty.
fn xi_candidate(t: &Connector, l: &NatTransMap<MorHandle, MorHandle>, q: &ExperimentalSetting, s: &Section) -> std::result::Result<Section, String> {
    let mut r = Section::new(format!("ξ[{}]", l.name));
    for g in l.source.source.objects() {
        let (xg, yg, lg) = (l.source.obj(g), l.target.obj(g), l.at(g));
        let Some(ry) = q.r_at(&yg) else { continue };
        let a1 = t.src.a1(&lg);
        let b1 = t.dst.a1(&lg);
        let ty = t.at(&yg).f;
        for u in ry.objects() {
            let key = a1.obj(&ty.obj(u));
            if let Some(prev) = r.get(&g.id, &key) {
                if prev.id != u.id {
                    return Err(format!("clause (a) forces {} and {} at {}", prev.id, u.id, key.id));
                }
            }
            r.insert(&g.id, &key, u.clone());
            let lhs = b1.obj(u).id;
            match s.get(&xg.id, &key) {
                Some(v) if v.id == lhs => {}
                other => return Err(format!("clause (b) fails at {}: {} vs {:?}", key.id, lhs, other.map(|v| v.id.clone()))),
            }
        }
    }
    Ok(r)
}

/// `(T∗L)[y[Q], r] ≤ x[T[Q, s]]` for the candidate `r ∈ Ξ(T, L, s)`, with
/// `y[Q] ∈ Exp(b∘y)` and `r ∈ Γ(y[Q], T∗L)`; not applicable when `Ξ` is empty.
pub fn charge_transfer_check(t: &Connector, l: &NatTransMap<MorHandle, MorHandle>, q: &ExperimentalSetting, tol: f64) -> Result<LawReport> {
    let law = format!("charge transfer of {} along {}", t.label, l.name);
    let s = projection_section(q, t)?;
    let r = match xi_candidate(t, l, q, &s) {
        Ok(r) => r,
        Err(why) => return Ok(LawReport::not_applicable(law, format!("Ξ is empty: {why}"))),
    };
    let yq = pullback_setting(&l.target, q);
    let by = t.dst.pullback(&l.target)?;
    let mut lemma = check_setting(&yq, &by, tol);
    lemma.law = "pullback setting is a setting".into();
    let tl = connector_star(t, l)?;
    let mut gamma = check_section(&r, &yq, &tl);
    gamma.law = "Ξ ⊂ Γ".into();
    let lhs = charge(&tl, &yq, &r)?;
    let rhs = pullback_setting(&l.source, &charge(t, q, &s)?);
    let order = setting_leq_report(&lhs, &rhs, tol);
    Ok(LawReport::merged(law, [lemma, gamma, order]))
}

fn find_inverse(ctx: &ContextCategory, phi: &MorHandle, tol: f64) -> Option<MorHandle> {
    ctx.hom(&phi.cod, &phi.dom).into_iter().find(|psi| {
        let a = ctx.compose(psi, phi).map(|c| ctx.distance(&c, &ctx.identity(&phi.dom))).unwrap_or(f64::INFINITY);
        let b = ctx.compose(phi, psi).map(|c| ctx.distance(&c, &ctx.identity(&phi.cod))).unwrap_or(f64::INFINITY);
        a <= tol && b <= tol
    })
}

/// Dynamics equivariance under context isomorphisms, and `T`-relatedness of
/// dynamics on hom-sets where `T₁ᵐ` is the identity.
pub fn symmetry_corollaries_check(t: &Connector, tol: f64) -> LawReport {
    let b = &t.dst;
    let ctx = b.ctx();
    let mut iso = LawReport::new("dynamics equivariance under isomorphisms");
    let mut any_iso = false;
    for phi in &ctx.sampler().morphisms {
        let Some(inv) = find_inverse(ctx, phi, 1e-9) else { continue };
        any_iso = true;
        let (m, n) = (phi.dom.clone(), phi.cod.clone());
        let (bphi, binv) = (b.at_mor(phi), b.at_mor(&inv));
        let (pm, pn) = (b.pattern(&m), b.pattern(&n));
        for y in &pn.g().sampler().objects {
            let back = binv.f.obj(&bphi.f.obj(y));
            iso.record_bool(back.id == y.id, || (vec![y.id.clone()], vec![phi.label()], back.id.clone(), "b₁ᵒ(φ⁻¹)∘b₁ᵒ(φ) = 1".into()));
            for z in &pn.g().sampler().objects {
                let (fy, fz) = (bphi.f.obj(y), bphi.f.obj(z));
                for h in pm.g().hom(&fy, &fz) {
                    let k = binv.f.mor(&h);
                    let lhs = pn.dynamics(&k).compose(&bphi.device(y));
                    let rhs = bphi.device(z).compose(&pm.dynamics(&h));
                    let d = match (&lhs, &rhs) {
                        (Ok(p), Ok(q)) => p.distance(q),
                        _ => f64::INFINITY,
                    };
                    iso.record(d, tol, || (vec![m.id.clone(), n.id.clone(), y.id.clone(), z.id.clone()], vec![phi.label(), h.label()], "τ_b(N)(b₁ᵐ(φ⁻¹)h)∘b₃(φ)y".into(), "b₃(φ)z∘τ_b(M)(h)".into()));
                }
            }
        }
    }
    if !any_iso {
        iso = LawReport::not_applicable(iso.law, "no sampled isomorphism");
    }
    let mut rel = LawReport::new("T-relatedness of dynamics");
    let mut any_rel = false;
    for n in &ctx.sampler().objects {
        let tn = t.at(n);
        let (pa, pb) = (t.src.pattern(n), b.pattern(n));
        for y in &pb.g().sampler().objects {
            for z in &pb.g().sampler().objects {
                let hb = pb.g().hom(y, z);
                let ha = pa.g().hom(&tn.f.obj(y), &tn.f.obj(z));
                let trivial = hb.len() == ha.len() && hb.iter().all(|g| tn.f.mor(g).payload.distance(&g.payload) <= 1e-12);
                if !trivial {
                    continue;
                }
                any_rel = true;
                for g in &hb {
                    let lhs = pb.dynamics(g).compose(&tn.device(y));
                    let rhs = tn.device(z).compose(&pa.dynamics(&tn.f.mor(g)));
                    let d = match (&lhs, &rhs) {
                        (Ok(p), Ok(q)) => p.distance(q),
                        _ => f64::INFINITY,
                    };
                    rel.record(d, tol, || (vec![n.id.clone(), y.id.clone(), z.id.clone()], vec![g.label()], "τ_b(N)(g)∘T₃(N)y".into(), "T₃(N)z∘τ_a(N)(g)".into()));
                }
            }
        }
    }
    if !any_rel {
        rel = LawReport::not_applicable(rel.law, "no hom-set on which T₁ᵐ is the identity");
    }
    LawReport::merged(format!("symmetry corollaries of {}", t.label), [iso, rel])
}

/// The target species realizes the source: for `E ∈ Exp(b)` and the
/// selections `y' = T₁ᵒy`, `g' = T₁ᵐg`, `ψ' = T₃†ψ`, `A' = T₃(y)A`,
/// the trajectories agree and the selections lie in `ea`.
pub fn realization_check(t: &Connector, e: &ExperimentalSetting, ea: &ExperimentalSetting, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("realization through {}", t.label));
    for (mid, rm) in &e.r {
        let Some(m) = ctx_object(&t.dst, mid) else { continue };
        let Some(ram) = ea.r_at(&m) else {
            r.record_bool(false, || (vec![mid.clone()], vec![], "R^a_M".into(), "present".into()));
            continue;
        };
        let tm = t.at(&m);
        let (pa, pb) = (t.src.pattern(&m), t.dst.pattern(&m));
        for g in &rm.sampler().morphisms {
            let (y, z) = (&g.dom, &g.cod);
            let (y1, z1, g1) = (tm.f.obj(y), tm.f.obj(z), tm.f.mor(g));
            r.record(ram.hom_distance(&g1), tol, || (vec![mid.clone(), y1.id.clone(), z1.id.clone()], vec![g1.label()], "g'".into(), "in R^a_M".into()));
            let alg = pa.algebra(&y1);
            let fam_a = ea.s_at(&m, &z1);
            for psi in e.s_at(&m, z).members() {
                let psi1 = tm.device(z).dual_apply(&psi);
                let mem = psi1.as_ref().map(|p| fam_a.contains(p, tol)).unwrap_or(Membership { found: false, nearest: f64::INFINITY, ambiguous: false });
                record_membership(&mut r, mem, tol, || (vec![mid.clone(), z1.id.clone()], vec![], "ψ'".into(), "in 𝔖^a".into()));
                let Ok(psi1) = psi1 else { continue };
                for a in observables(&alg) {
                    let lhs = tm.device(y).apply(&a).and_then(|a1| pb.dynamics(g).apply(&a1)).and_then(|x| psi.apply(&x));
                    let rhs = pa.dynamics(&g1).apply(&a).and_then(|x| psi1.apply(&x));
                    let d = match (lhs, rhs) {
                        (Ok(p), Ok(q)) => (p.re - q.re).abs(),
                        _ => f64::INFINITY,
                    };
                    r.record(d, tol, || (vec![mid.clone(), y.id.clone(), z.id.clone()], vec![g.label()], "𝔣^b_(ψ, T₃A)(g)".into(), "𝔣^a_(T₃†ψ, A)(T₁g)".into()));
                }
            }
        }
    }
    r
}
