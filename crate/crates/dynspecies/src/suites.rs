//! Bundled fixtures and the check suites run by scenarios and the
//! acceptance target. Every suite returns a [`LawReport`]; suites taking a
//! `fault` flag build a deliberately corrupted instance instead.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::element::{hermitian_eigenvalues, random_density};
use crate::algebra::{
    c, dagger, interference_check, mean_value, propensity, spectral_measure, AlgebraElement, CMat, Functional,
    MapFlags, PointMap, PositiveMap, StarAlgebra,
};
use crate::category::{time_monoid, CatMorphism, CatObject, FunctorMap, LazyCategory, MorHandle, NatTransMap, ObjHandle, Payload, SamplerConfig};
use crate::category::{check_interchange, poset_category};
use crate::cosmo::{
    acceleration_check, convergence_order, geodesic_integrate, geodesic_relatedness_check, hubble_factorization_check, positivity_check,
    FactorSamples, RWSpacetime, RwFixture, ScaleFunction, ToyConfig, QuantumToy, build_toy_connector,
};
use crate::error::{Error, Result};
use crate::flow::{
    check_bracket_related, check_flow_naturality, lattice_grid, region_handle_time, FlowContexts, Region, VectorFieldModel, VfMorphism,
    VfObject,
};
use crate::pattern::{
    chdv_category, check_pattern, check_psi_functoriality, check_psi_functoriality_with, dagger_contravariance_check, dp_category,
    dp_compose, psi, ChdvMorphism, DpMorphism, DynCat, DynamicalPattern,
};
use crate::report::LawReport;
use crate::species::{
    charge, charge_compose_check, charge_compose_check_with, charge_star_check, compose_connectors, charge_transfer_check, check_setting, check_setting_clauses, check_species,
    equiformity_check, projection_section, standard_setting, Connector, FunctionalFamily, Species,
};

/// Shape of the matrix-payload fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatrixConfig {
    pub dims: Vec<usize>,
    pub patterns_per_dim: usize,
    pub morphisms_per_pair: usize,
    pub times: Vec<f64>,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig { dims: vec![2, 3], patterns_per_dim: 3, morphisms_per_pair: 4, times: vec![-0.5, 0.25, 0.5, 1.0] }
    }
}

/// Patterns on `Mat(d)` over one time monoid, `τ(t) = Ad e^{−itH}` with a
/// diagonal `H` per dimension, and dp morphisms whose components conjugate
/// by diagonal phases (so they commute with the dynamics).
#[derive(Clone)]
pub struct MatrixFixture {
    pub g: DynCat,
    pub patterns: Vec<DynamicalPattern>,
    pub morphisms: Vec<DpMorphism>,
    /// Composites of the sampled composable pairs of `dp`.
    pub composites: Vec<DpMorphism>,
    pub dp: LazyCategory<DpMorphism>,
    pub chdv: LazyCategory<ChdvMorphism>,
}

fn diag(values: impl IntoIterator<Item = num_complex::Complex64>) -> CMat {
    CMat::from_diagonal(&DVector::from_vec(values.into_iter().collect()))
}

fn evolution(h: &[f64], t: f64) -> CMat {
    diag(h.iter().map(|e| c(0.0, -t * e).exp()))
}

fn star(g: &DynCat) -> ObjHandle {
    g.objects()[0].clone()
}

/// `(1_G, Ad W)` from `src` to `dst`.
pub fn conjugation_morphism(name: &str, src: &DynamicalPattern, dst: &DynamicalPattern, w: CMat) -> Result<DpMorphism> {
    let x = star(src.g());
    let (a, b) = (src.algebra(&x), dst.algebra(&x));
    PositiveMap::block_shift(name, &a, &b, vec![0], w.clone())?;
    let label = name.to_string();
    DpMorphism::new(name, src, dst, FunctorMap::identity(src.g()), move |_| {
        PositiveMap::block_shift(label.clone(), &a, &b, vec![0], w.clone()).expect("shape checked above")
    })
}

pub fn matrix_fixture(cfg: &MatrixConfig, seed: u64, tol: f64) -> Result<MatrixFixture> {
    if cfg.dims.is_empty() || cfg.dims.iter().any(|d| !(1..=5).contains(d)) {
        return Err(Error::Config(format!("matrix dims {:?} must be nonempty and within 1..=5", cfg.dims)));
    }
    if cfg.patterns_per_dim == 0 || cfg.morphisms_per_pair == 0 {
        return Err(Error::Config("matrix fixture needs at least one pattern and morphism per dimension".into()));
    }
    if cfg.times.is_empty() || cfg.times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("matrix times must be nonempty and finite".into()));
    }
    let g = time_monoid("G", &cfg.times);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut patterns = Vec::new();
    let mut morphisms = Vec::new();
    for &d in &cfg.dims {
        let h: Arc<Vec<f64>> = Arc::new((0..d).map(|_| rng.gen_range(-1.5..1.5)).collect());
        let group: Vec<DynamicalPattern> = (0..cfg.patterns_per_dim)
            .map(|p| {
                let alg = StarAlgebra::matrix_algebra(format!("A[P{d}.{p}]"), d, tol)?;
                let (a1, h1) = (alg.clone(), h.clone());
                Ok(DynamicalPattern::new(format!("P{d}.{p}"), g.clone(), move |_| alg.clone(), move |m: &MorHandle| {
                    let t = m.payload.as_real().unwrap_or(0.0);
                    PositiveMap::kraus(format!("Ad U({t})"), &a1, vec![evolution(&h1, t)])
                }))
            })
            .collect::<Result<_>>()?;
        for (i, src) in group.iter().enumerate() {
            for (j, dst) in group.iter().enumerate() {
                for k in 0..cfg.morphisms_per_pair {
                    let w = diag((0..d).map(|_| c(0.0, rng.gen_range(-3.0..3.0)).exp()));
                    morphisms.push(conjugation_morphism(&format!("W{d}.{i}{j}#{k}"), src, dst, w)?);
                }
            }
        }
        patterns.extend(group);
    }
    let scfg = SamplerConfig { seed, ..SamplerConfig::default() };
    let dp = dp_category("dp[mat]", patterns.clone(), morphisms.clone(), tol, scfg);
    let composites: Vec<DpMorphism> = dp.sampler().pairs.iter().map(|(a, b)| dp_compose(a, b)).collect::<Result<_>>()?;
    let chdv_morphisms: Vec<ChdvMorphism> = morphisms.iter().chain(&composites).map(psi).collect();
    let chdv = chdv_category("Chdv[mat]", patterns.clone(), chdv_morphisms, tol, scfg);
    Ok(MatrixFixture { g, patterns, morphisms, composites, dp, chdv })
}

fn rotation(d: usize, theta: f64) -> CMat {
    let mut m = CMat::identity(d, d);
    if d >= 2 {
        m[(0, 0)] = c(theta.cos(), 0.0);
        m[(0, 1)] = c(-theta.sin(), 0.0);
        m[(1, 0)] = c(theta.sin(), 0.0);
        m[(1, 1)] = c(theta.cos(), 0.0);
    }
    m
}

/// A conjugation by a real rotation, which does not commute with the dynamics.
pub fn wrong_component(fx: &MatrixFixture) -> Result<DpMorphism> {
    let x = star(&fx.g);
    let p = fx
        .patterns
        .iter()
        .find(|p| p.algebra(&x).mat_dim().map(|d| d.0 >= 2).unwrap_or(false))
        .ok_or_else(|| Error::Config("fault needs a pattern of dimension ≥ 2".into()))?;
    let d = p.algebra(&x).mat_dim().map(|d| d.0).unwrap_or(2);
    conjugation_morphism("W[rotated]", p, p, rotation(d, 0.3))
}

/// `1∘m = m = m∘1` on the given morphisms.
pub fn unit_laws<M: CatMorphism>(law: &str, cat: &LazyCategory<M>, morphisms: &[M], tol: f64) -> LawReport {
    let mut r = LawReport::new(law);
    for m in morphisms {
        let (x, y) = (m.dom(), m.cod());
        for (side, res) in [("left", cat.compose(&cat.identity(&y), m)), ("right", cat.compose(m, &cat.identity(&x)))] {
            let d = res.as_ref().map(|c| cat.distance(c, m)).unwrap_or(f64::INFINITY);
            r.record(d, tol, || (vec![x.id(), y.id()], vec![m.label()], format!("{side} unit"), m.label()));
        }
    }
    r
}

/// `(f∘g)∘h = f∘(g∘h)` on the sampled triples.
pub fn associativity<M: CatMorphism>(law: &str, cat: &LazyCategory<M>, tol: f64) -> LawReport {
    let mut r = LawReport::new(law);
    for (f, g, h) in &cat.sampler().triples {
        let lhs = cat.compose(f, g).and_then(|fg| cat.compose(&fg, h));
        let rhs = cat.compose(g, h).and_then(|gh| cat.compose(f, &gh));
        let d = match (&lhs, &rhs) {
            (Ok(a), Ok(b)) => cat.distance(a, b),
            _ => f64::INFINITY,
        };
        r.record(d, tol, || (vec![h.dom().id(), f.cod().id()], vec![f.label(), g.label(), h.label()], "(f∘g)∘h".into(), "f∘(g∘h)".into()));
    }
    r
}

/// Associativity of dp composition; with `fault`, one generator is
/// replaced by a component from an unrelated algebra map so that the
/// composites disagree.
pub fn dp_associativity(fx: &MatrixFixture, tol: f64, fault: bool) -> Result<LawReport> {
    if !fault {
        return Ok(associativity("dp associativity", &fx.dp, tol));
    }
    let bad = wrong_component(fx)?;
    let p = bad.src.clone();
    let b2 = bad.clone();
    // a composition that drops the first factor's component for the corrupted generator
    let cat = LazyCategory::builder("dp[corrupted]")
        .objects(vec![p.clone()])
        .compose(move |g: &DpMorphism, h: &DpMorphism| if g.t.name == b2.t.name { h.clone() } else { dp_compose(g, h).expect("endpoints agree") })
        .identity(DpMorphism::identity)
        .distance(move |a, b| crate::pattern::dp_distance(a, b, tol))
        .sampler(crate::category::Sampler::from_morphisms(vec![p.clone()], vec![bad.clone(), DpMorphism::identity(&p), bad], &SamplerConfig::default()))
        .tol(tol)
        .build();
    Ok(associativity("dp associativity", &cat, tol))
}

/// Unit laws of dp on generators and sampled composites; with `fault`, the
/// identity of the first pattern carries a non-trivial component.
pub fn dp_unitality(fx: &MatrixFixture, tol: f64, fault: bool) -> Result<LawReport> {
    let all: Vec<DpMorphism> = fx.morphisms.iter().chain(&fx.composites).cloned().collect();
    if !fault {
        return Ok(unit_laws("dp unitality", &fx.dp, &all, tol));
    }
    let bad = wrong_component(fx)?;
    let b2 = bad.clone();
    let cat = LazyCategory::builder("dp[corrupted unit]")
        .objects(fx.patterns.clone())
        .compose(|g: &DpMorphism, h: &DpMorphism| dp_compose(g, h).expect("endpoints agree"))
        .identity(move |p: &DynamicalPattern| if p.label == b2.src.label { b2.clone() } else { DpMorphism::identity(p) })
        .distance(move |a, b| crate::pattern::dp_distance(a, b, tol))
        .tol(tol)
        .build();
    let sample: Vec<DpMorphism> = all.into_iter().filter(|m| m.src.label == bad.src.label).collect();
    Ok(unit_laws("dp unitality", &cat, &sample, tol))
}

/// Unit neutrality in Chdv on `Ψ` of the generators and composites; with
/// `fault`, a morphism whose channel is not the dagger of its device stands
/// in for the unit.
pub fn chdv_unit_neutrality(fx: &MatrixFixture, tol: f64, fault: bool) -> Result<LawReport> {
    let morphisms = fx.chdv.sampler().morphisms.clone();
    if !fault {
        return Ok(unit_laws("Chdv unit neutrality", &fx.chdv, &morphisms, tol));
    }
    let bad = psi(&wrong_component(fx)?);
    let b2 = bad.clone();
    let cat = LazyCategory::builder("Chdv[corrupted unit]")
        .objects(fx.patterns.clone())
        .compose(|g: &ChdvMorphism, h: &ChdvMorphism| crate::pattern::chdv_compose(g, h).expect("endpoints agree"))
        .identity(move |p: &DynamicalPattern| if p.label == b2.src.label { b2.clone() } else { ChdvMorphism::unit(p) })
        .distance(move |a, b| crate::pattern::chdv_distance(a, b, tol))
        .tol(tol)
        .build();
    let sample: Vec<ChdvMorphism> = morphisms.into_iter().filter(|m| m.src.label == bad.src.label).collect();
    Ok(unit_laws("Chdv unit neutrality", &cat, &sample, tol))
}

fn time_nat(g: &DynCat, s: f64) -> NatTransMap<MorHandle, MorHandle> {
    let id = FunctorMap::identity(g);
    NatTransMap::new(format!("α({s})"), id.clone(), id, move |x: &ObjHandle| MorHandle::new(x.clone(), x.clone(), Payload::Real(s)))
}

/// `(δ∗γ)∘(β∗α) = (δ∘β)∗(γ∘α)` with `α, γ` time shifts of the dynamical
/// category and `β, δ` the transformations of composable dp morphisms.
pub fn interchange_suite(fx: &MatrixFixture, cfg: &MatrixConfig, count: usize, tol: f64, fault: bool) -> Result<LawReport> {
    let mut r = LawReport::new("interchange law");
    let times = &cfg.times;
    let pairs: Vec<(DpMorphism, DpMorphism)> = if fault {
        let bad = wrong_component(fx)?;
        vec![(DpMorphism::identity(&bad.dst), bad)]
    } else {
        fx.dp.sampler().pairs.iter().take(count).cloned().collect()
    };
    for (i, (delta, beta)) in pairs.iter().enumerate() {
        let s1 = times[i % times.len()];
        let s2 = times[(i + 1) % times.len()];
        let (alpha, gamma) = (time_nat(&fx.g, s1), time_nat(&fx.g, s2));
        r.absorb(check_interchange(&delta.t, &gamma, &beta.t, &alpha, tol)?);
    }
    Ok(r)
}

/// `Ψ` functoriality; with `fault`, a candidate `Ψ` that post-composes every
/// device with a small rotation.
pub fn psi_suite(fx: &MatrixFixture, tol: f64, fault: bool) -> LawReport {
    if !fault {
        return check_psi_functoriality(&fx.dp, tol);
    }
    let bent = |m: &DpMorphism| -> ChdvMorphism {
        let (t1, t2) = (m.t.clone(), m.t.clone());
        let dst = m.dst.clone();
        ChdvMorphism::new(
            &m.src,
            &m.dst,
            m.f.clone(),
            format!("{}†", m.t.name),
            move |x| dagger(&t1.at(x)),
            format!("{}'", m.t.name),
            move |x| {
                let alg = dst.algebra(x);
                let d = alg.mat_dim().map(|d| d.0).unwrap_or(1);
                PositiveMap::kraus("tilt", &alg, vec![rotation(d, 0.05)]).compose(&t2.at(x)).expect("same algebra")
            },
        )
        .expect("valid directions")
    };
    check_psi_functoriality_with(&fx.dp, bent, tol)
}

/// Dagger contravariance on sampled composable pairs; with `fault`, a
/// component whose stated dual is the identity.
pub fn dagger_suite(fx: &MatrixFixture, count: usize, tol: f64, fault: bool) -> Result<LawReport> {
    let mut r = LawReport::new("dagger contravariance");
    if fault {
        let good = wrong_component(fx)?;
        let p = good.src.clone();
        let x = star(p.g());
        let alg = p.algebra(&x);
        let d = alg.mat_dim().map(|d| d.0).unwrap_or(2);
        let w = diag((0..d).map(|k| c(0.0, 0.4 * (k as f64 + 1.0)).exp()));
        let w2 = w.clone();
        let a2 = alg.clone();
        let bad = DpMorphism::new("W[bad dual]", &p, &p, FunctorMap::identity(p.g()), move |_| {
            let w3 = w2.clone();
            PositiveMap::custom(
                "Ad W (dual claimed trivial)",
                &a2,
                &a2,
                MapFlags::HOM,
                move |a| match a {
                    AlgebraElement::Mat(m) => Ok(AlgebraElement::Mat(w3.adjoint() * m * &w3)),
                    _ => Err(Error::VariantMismatch("matrix map on a function".into())),
                },
                Some(Arc::new(|phi: &Functional| Ok(phi.clone()))),
            )
        })?;
        r.absorb(dagger_contravariance_check(&bad, &bad, tol)?);
        return Ok(r);
    }
    for (g, h) in fx.dp.sampler().pairs.iter().take(count) {
        r.absorb(dagger_contravariance_check(g, h, tol)?);
    }
    Ok(r)
}

/// Category laws of every flow dynamical category and of the context
/// category (closed-form flow payloads).
pub fn flow_category_laws(ctx: &FlowContexts, cfg: SamplerConfig, tol: f64) -> LawReport {
    let mut r = LawReport::new("flow category laws");
    for o in &ctx.objects {
        let g = ctx.pattern(&o.label).g();
        r.absorb(associativity("", g, tol));
        r.absorb(unit_laws("", g, &g.sampler().morphisms, tol));
    }
    let cat = ctx.category(cfg);
    r.absorb(associativity("", &cat, tol));
    r.absorb(unit_laws("", &cat, &cat.sampler().morphisms, tol));
    r
}

// ---------- operational quantities

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut g = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    (&g + g.adjoint()) * c(0.5, 0.0)
}

fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    random_hermitian(d, rng).map(|z| z * c(0.0, -2.0)).exp()
}

fn op_norm(m: &CMat) -> f64 {
    hermitian_eigenvalues(&(m.adjoint() * m)).into_iter().fold(0.0, f64::max).sqrt()
}

fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Unital mixed-unitary channels, sampled functionals and effects on
/// `Mat(d)`, `d ∈ {2, 3, 4}`; every propensity must lie in `[0, 1]`. With
/// `fault`, the maps are scaled by 2 and stop being channels.
pub fn propensity_suite(seed: u64, tol: f64, fault: bool) -> Result<LawReport> {
    let mut r = LawReport::new("propensity range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in [2usize, 3, 4] {
        let alg = StarAlgebra::matrix_algebra(format!("M{d}"), d, 1e-12)?;
        let mut effects = vec![alg.unit(), alg.zero()];
        let mut e0 = CMat::zeros(d, d);
        e0[(0, 0)] = c(1.0, 0.0);
        effects.push(AlgebraElement::Mat(e0));
        for _ in 0..2 {
            let p = random_density(d, d, &mut rng, 1.0);
            let top = hermitian_eigenvalues(&p).into_iter().fold(0.0, f64::max);
            effects.push(AlgebraElement::Mat(p * c(rng.gen_range(0.2..1.0) / top, 0.0)));
        }
        for k in 0..12 {
            let n = 1 + k % 3;
            let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let scale = if fault { 2.0 } else { 1.0 };
            let ops: Vec<CMat> = weights.iter().map(|w| random_unitary(d, &mut rng) * c((scale * w / total).sqrt(), 0.0)).collect();
            let j = dagger(&PositiveMap::kraus(format!("K{d}.{k}"), &alg, ops));
            for omega in alg.sample_functionals() {
                for (ei, e) in effects.iter().enumerate() {
                    let p = propensity(&j, omega, e);
                    let d = match &p {
                        Ok(v) => (-v).max(v - 1.0).max(0.0),
                        Err(_) => f64::INFINITY,
                    };
                    r.record(d, tol, || (vec![alg.label().into()], vec![format!("K{d}.{k}")], format!("propensity {p:?} for effect {ei}"), "[0, 1]".into()));
                }
            }
        }
    }
    Ok(r)
}

fn interference_record(r: &mut LawReport, alg: &StarAlgebra, a: &CMat, b: &CMat, cc: &CMat, omega: &Functional, tol: f64, tag: &str) -> Option<f64> {
    let (a, b, cc) = (AlgebraElement::Mat(a.clone()), AlgebraElement::Mat(b.clone()), AlgebraElement::Mat(cc.clone()));
    match interference_check(alg, &a, &b, &cc, omega) {
        Ok(i) => {
            r.record(i.residual(), tol, || (vec![alg.label().into()], vec![tag.into()], format!("p(c(a+b)) = {}", i.lhs), format!("parts + defect = {}", i.rhs_sum + i.defect)));
            for f in &i.precondition_failures {
                r.record_bool(false, || (vec![alg.label().into()], vec![tag.into()], f.clone(), "unit ball".into()));
            }
            Some(i.defect)
        }
        Err(e) => {
            r.record_bool(false, || (vec![alg.label().into()], vec![tag.into()], e.to_string(), "defined".into()));
            None
        }
    }
}

/// Interference identity on random contractions of `Mat(2)`, `Mat(3)` and
/// on a Hadamard arrangement whose defect is nonzero. With `fault`, one
/// path leaves the unit ball.
pub fn interference_suite(seed: u64, tol: f64, fault: bool) -> Result<LawReport> {
    let mut r = LawReport::new("interference identity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1f);
    for d in [2usize, 3] {
        let alg = StarAlgebra::matrix_algebra(format!("M{d}"), d, 1e-12)?;
        for k in 0..40 {
            let a = random_matrix(d, &mut rng);
            let b = random_matrix(d, &mut rng);
            let cc = random_matrix(d, &mut rng);
            let a = &a * c(1.0 / (2.0 * op_norm(&a)), 0.0);
            let b = &b * c(if fault && k == 0 { 4.0 } else { 1.0 } / (2.0 * op_norm(&b)), 0.0);
            let cc = &cc * c(1.0 / op_norm(&cc), 0.0);
            let omega = Functional::Mat({ let w = rng.gen_range(0.5..2.0); random_density(d, d, &mut rng, w) });
            interference_record(&mut r, &alg, &a, &b, &cc, &omega, tol, &format!("random {d}.{k}"));
        }
    }
    let alg = StarAlgebra::matrix_algebra("M2", 2, 1e-12)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = CMat::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let b = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let hadamard = CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
    let plus = Functional::density(CMat::from_element(2, 2, c(0.5, 0.0)))?;
    if let Some(defect) = interference_record(&mut r, &alg, &a, &b, &hadamard, &plus, tol, "hadamard") {
        r.record_bool(defect.abs() > 0.1, || (vec!["M2".into()], vec!["hadamard".into()], format!("defect {defect}"), "nonzero".into()));
    }
    Ok(r)
}

/// `ω(O) = Σ λ ν_λ` and `Σ ν_λ = ω(1)` for random observables, `d ≤ 5`.
/// With `fault`, the observable is not self-adjoint.
pub fn spectral_suite(seed: u64, tol: f64, fault: bool) -> Result<LawReport> {
    let mut r = LawReport::new("spectral reconstruction");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2e);
    for d in 1..=5usize {
        let alg = StarAlgebra::matrix_algebra(format!("M{d}"), d, 1e-12)?;
        for k in 0..20 {
            let mut o = random_hermitian(d, &mut rng);
            if k % 4 == 0 && d > 1 {
                // a repeated eigenvalue
                let u = random_unitary(d, &mut rng);
                let mut ev: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
                ev[1] = ev[0];
                o = u.adjoint() * diag(ev.into_iter().map(|x| c(x, 0.0))) * u;
                o = (&o + o.adjoint()) * c(0.5, 0.0);
            }
            if fault && k == 0 {
                o[(0, 0)] += c(0.0, 0.5);
            }
            let omega = Functional::Mat({ let w = rng.gen_range(0.5..2.0); random_density(d, d, &mut rng, w) });
            let obs = AlgebraElement::Mat(o);
            let tag = format!("{d}.{k}");
            match (spectral_measure(&alg, &omega, &obs), omega.apply(&obs)) {
                (Ok(nu), Ok(direct)) => {
                    let recon: f64 = nu.iter().map(|(l, v)| l * v).sum();
                    r.record(recon - direct.re, tol, || (vec![alg.label().into()], vec![tag.clone()], format!("Σλν = {recon}"), format!("ω(O) = {}", direct.re)));
                    let mass: f64 = nu.iter().map(|x| x.1).sum();
                    r.record(mass - omega.strength(), tol, || (vec![alg.label().into()], vec![tag.clone()], format!("Σν = {mass}"), "ω(1)".into()));
                }
                (m, _) => r.record_bool(false, || (vec![alg.label().into()], vec![tag.clone()], format!("{:?}", m.err()), "spectral measure".into())),
            }
        }
    }
    Ok(r)
}

/// `⟨O⟩_{sω} = ⟨O⟩_ω` bitwise for dyadic `s`. With `fault`, only one matrix
/// entry of the density is rescaled.
pub fn mean_value_suite(seed: u64, fault: bool) -> Result<LawReport> {
    let mut r = LawReport::new("mean-value scale invariance");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3d);
    for d in 1..=4usize {
        for k in 0..25 {
            let o = AlgebraElement::Mat(random_hermitian(d, &mut rng));
            let rho = { let w = rng.gen_range(0.5..2.0); random_density(d, d, &mut rng, w) };
            let base = mean_value(&Functional::Mat(rho.clone()), &o)?;
            for s in [0.125, 0.5, 2.0, 4.0, 8.0] {
                let mut scaled = &rho * c(s, 0.0);
                if fault && k == 0 {
                    scaled[(0, 0)] *= c(1.5, 0.0);
                }
                let v = mean_value(&Functional::Mat(scaled), &o)?;
                r.record(v - base, 0.0, || (vec![format!("M{d}")], vec![format!("s={s}")], format!("⟨O⟩_sω = {v}"), format!("⟨O⟩_ω = {base}")));
            }
        }
    }
    Ok(r)
}

// ---------- flow contexts

fn line(label: &str, offset: f64, grid: &[f64]) -> Result<VfObject> {
    let mut regions: Vec<Region> = (0..4)
        .map(|k| Region::new(format!("R{k}"), vec![offset + k as f64], vec![offset + k as f64 + 1.0], 4, None))
        .collect::<Result<_>>()?;
    regions.push(Region::new("B", vec![offset], vec![offset + 4.0], 4, None)?);
    VfObject::new(label, VectorFieldModel::translation("∂x", vec![1.0]), regions, grid.to_vec())
}

/// `M` on `[0, 4]` and `N` on `[−1, 3]` under `∂x`, with unit cells and the
/// whole interval as regions, the translation `N → M` and its inverse.
pub fn line_contexts() -> Result<FlowContexts> {
    let grid = lattice_grid(0.5, 8);
    let m = line("M", 0.0, &grid)?;
    let n = line("N", -1.0, &grid)?;
    let phi = VfMorphism::new("φ", &m, &n, PointMap::translation(&[1.0]))?;
    let inv = VfMorphism::new("φ⁻¹", &n, &m, PointMap::translation(&[-1.0]))?;
    FlowContexts::new(vec![m, n], vec![phi, inv])
}

/// As [`line_contexts`], with `M` on a finer time lattice and only the
/// translation `N → M`.
pub fn line_contexts_uneven() -> Result<FlowContexts> {
    let m = line("M", 0.0, &lattice_grid(0.5, 8))?;
    let n = line("N", -1.0, &lattice_grid(1.0, 4))?;
    let phi = VfMorphism::new("φ", &m, &n, PointMap::translation(&[1.0]))?;
    FlowContexts::new(vec![m, n], vec![phi])
}

/// The diagonal field `diag(0.5, 0.25)x` on boxes of the positive quadrant
/// of `ℝ²`, and a copy related by the scaling `diag(2, 0.5)`.
pub fn plane_contexts() -> Result<FlowContexts> {
    let field = VectorFieldModel::linear("diag(0.5,0.25)x", DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]));
    let boxes = [("S", [1.0, 1.0], [2.0, 2.0]), ("T", [1.1, 1.05], [2.6, 2.4]), ("B", [0.5, 0.5], [4.0, 4.0])];
    let scale = [2.0, 0.5];
    let grid = lattice_grid(0.25, 8);
    let m = VfObject::new(
        "M",
        field.clone(),
        boxes.iter().map(|(l, lo, hi)| Region::new(*l, lo.to_vec(), hi.to_vec(), 4, None)).collect::<Result<_>>()?,
        grid.clone(),
    )?;
    let n = VfObject::new(
        "N",
        field,
        boxes
            .iter()
            .map(|(l, lo, hi)| Region::new(*l, vec![lo[0] / scale[0], lo[1] / scale[1]], vec![hi[0] / scale[0], hi[1] / scale[1]], 4, None))
            .collect::<Result<_>>()?,
        grid,
    )?;
    let s = PointMap::affine(DMatrix::from_row_slice(2, 2, &[scale[0], 0.0, 0.0, scale[1]]), DVector::zeros(2));
    let phi = VfMorphism::new("φ", &m, &n, s)?;
    FlowContexts::new(vec![m, n], vec![phi])
}

/// Flow naturality of every registered morphism; with `fault`, the first
/// morphism's map is bent by `q ↦ q + 0.1q²` after `φ`.
pub fn flow_naturality_suite(ctx: &FlowContexts, tol: f64, fault: bool) -> LawReport {
    let mut r = LawReport::new("flow naturality");
    for (i, m) in ctx.morphisms.iter().enumerate() {
        let (src, dst) = (ctx.object(&m.src).expect("registered"), ctx.object(&m.dst).expect("registered"));
        if fault && i == 0 {
            let phi = m.phi.clone();
            let mut bad = m.clone();
            bad.phi = PointMap::custom("φ+0.1φ²", move |p: &[f64]| phi.apply(p).iter().map(|x| x + 0.1 * x * x).collect());
            r.absorb(check_flow_naturality(&bad, src, dst, tol));
        } else if !fault {
            r.absorb(check_flow_naturality(m, src, dst, tol));
        }
    }
    r
}

/// Functoriality of `F_[M,U]` for every context; with `fault`, the first
/// context's dynamics runs the flow for `t + 0.01t²` instead of `t`.
pub fn flow_functor_suite(ctx: &FlowContexts, tol: f64, fault: bool) -> LawReport {
    let mut r = LawReport::new("flow functor");
    for (i, o) in ctx.objects.iter().enumerate() {
        let p = ctx.pattern(&o.label).clone();
        if fault && i == 0 {
            let (p1, p2, field) = (p.clone(), p.clone(), o.field.clone());
            let bad = DynamicalPattern::new(format!("{}'", p.label), p.g().clone(), move |x| p1.algebra(x), move |g: &MorHandle| {
                let t = region_handle_time(g);
                if t == 0.0 {
                    return p2.dynamics(g);
                }
                let bent = t + 0.01 * t * t;
                let theta = field.flow_map(bent).expect("closed-form flow");
                PositiveMap::pullback(format!("ϑ({bent})*"), &p2.algebra(&g.dom), &p2.algebra(&g.cod), theta)
            });
            r.absorb(check_pattern(&bad, tol));
        } else if !fault {
            r.absorb(check_pattern(&p, tol));
        }
    }
    r
}

/// The flow species with the device of every non-identity `a(φ)` bent by
/// `q ↦ q + 10⁻³q²`.
pub fn bent_species(ctx: &FlowContexts, cfg: SamplerConfig, tol: f64) -> Species {
    let a = ctx.species(cfg, tol);
    let (c1, a1) = (ctx.clone(), a.clone());
    let map = FunctorMap::new(
        "𝔞'",
        a.ctx().clone(),
        crate::pattern::chdv_category("Chdv", Vec::new(), Vec::new(), tol, cfg),
        move |x: &ObjHandle| a1.pattern(x),
        move |m: &MorHandle| {
            let dpm = c1.dp_morphism(m).expect("registered");
            if m.dom.id == m.cod.id {
                return psi(&dpm);
            }
            let d2 = dpm.clone();
            let bent = DpMorphism::new(format!("{}'", dpm.t.name), &dpm.src, &dpm.dst, dpm.f.clone(), move |y| {
                let alg = d2.dst.algebra(y);
                let nudge = PositiveMap::pullback("nudge", &alg, &alg, PointMap::custom("q+1e-3q²", |q: &[f64]| q.iter().map(|x| x + 1e-3 * x * x).collect()));
                nudge.compose(&d2.component(y)).expect("same algebra")
            })
            .expect("valid directions");
            psi(&bent)
        },
    );
    Species::new("𝔞'", map)
}

pub fn species_suite(ctx: &FlowContexts, cfg: SamplerConfig, tol: f64, fault: bool) -> LawReport {
    let a = if fault { bent_species(ctx, cfg, tol) } else { ctx.species(cfg, tol) };
    check_species(&a, tol)
}

fn probe_field(q: &[f64]) -> Vec<f64> {
    let n = q.len();
    (0..n).map(|i| q[i].sin() + 0.25 * q[(i + 1) % n] * q[(i + 1) % n]).collect()
}

/// For every registered affine `φ: M → N`, `[V_M, φ_*W]` and `[V_N, W]`
/// are `φ`-related, with `W` a fixed nonlinear field on `N`. With `fault`,
/// the field on `M` is perturbed so the pair is no longer related.
pub fn bracket_suite(ctx: &FlowContexts, h: f64, tol: f64, fault: bool) -> Result<LawReport> {
    let mut r = LawReport::new("bracket relatedness");
    for m in &ctx.morphisms {
        let (src, dst) = (ctx.object(&m.src).expect("registered"), ctx.object(&m.dst).expect("registered"));
        let phi = m.phi.clone();
        let inv = phi.inverse().ok_or_else(|| Error::Precondition(format!("{} is not invertible", m.label)))?;
        let a = phi.linear_part().ok_or_else(|| Error::Precondition(format!("{} is not affine", m.label)))?;
        let n = dst.dim();
        let w2 = VectorFieldModel::numeric("W", n, 0.01, probe_field);
        let w1 = VectorFieldModel::numeric("φ_*W", n, 0.01, move |p: &[f64]| {
            let mut v: Vec<f64> = (&a * DVector::from_vec(probe_field(&inv.apply(p)))).iter().copied().collect();
            if fault {
                v[0] += 0.05 * p[0] * p[0];
            }
            v
        });
        let probes: Vec<Vec<f64>> = dst.regions.iter().flat_map(|y| y.probes().to_vec()).collect();
        r.absorb(check_bracket_related(&phi, &probes, &src.field, &w1, &dst.field, &w2, h, tol));
    }
    Ok(r)
}

// ---------- equiformity and charge

/// Device of `T(M)` bent by `q ↦ q + 10⁻³q²` on every region of the first context.
pub fn corrupt_device(t: &Connector) -> Result<Connector> {
    let m = t.src.ctx().objects()[0].clone();
    let tm = t.at(&m);
    t.with_device(&m, move |x| {
        let dev = tm.device(x);
        let alg = dev.source().clone();
        let nudge = PositiveMap::pullback("nudge", &alg, &alg, PointMap::custom("q+1e-3q²", |q: &[f64]| q.iter().map(|x| x + 1e-3 * x * x).collect()));
        if alg.is_fn() {
            dev.compose(&nudge).expect("same algebra")
        } else {
            dev
        }
    })
}

/// Equiformity of `t` with the standard setting of its target and the
/// projection section.
pub fn equiformity_suite(t: &Connector, tol: f64, fault: bool) -> Result<LawReport> {
    let e = standard_setting(&t.dst);
    let s = projection_section(&e, t)?;
    let t = if fault { corrupt_device(t)? } else { t.clone() };
    Ok(equiformity_check(&t, &e, &s, tol))
}

/// Bundled exact toy: block orbits of `∂x` through 0.25 in `M` and −0.75
/// in `N` with step 0.5, on [`line_contexts`].
pub fn exact_toy_connector(ctx: &FlowContexts, a: &Species, tol: f64) -> Result<Connector> {
    let cfg = ToyConfig { orbit_len: 8, delta: 0.5, lambda: 1, block: 2, omega: 0.7 };
    let toys = vec![QuantumToy::new(ctx, "M", vec![0.25], cfg)?, QuantumToy::new(ctx, "N", vec![-0.75], cfg)?];
    build_toy_connector(ctx, a, toys, tol)
}

/// The standard setting of the target with the first context's largest
/// region reduced to a single functional.
pub fn shrunken_setting(a: &Species) -> crate::species::ExperimentalSetting {
    let e = standard_setting(a);
    let m = a.ctx().objects()[0].clone();
    let g = a.pattern(&m).g().clone();
    let big = g.objects().last().cloned().expect("regions");
    let alg = a.pattern(&m).algebra(&big);
    let keep = alg.sample_functionals().first().cloned().expect("samples");
    e.with_family(&m, &big, FunctionalFamily::Finite { alg, members: vec![keep] })
}

/// The standard setting passes every clause; with `fault`, the shrunken one
/// must fail somewhere.
pub fn setting_suite(a: &Species, tol: f64, fault: bool) -> LawReport {
    if fault {
        let e = shrunken_setting(a);
        return LawReport::merged("setting clauses", check_setting_clauses(&e, a, tol));
    }
    check_setting(&standard_setting(a), a, tol)
}

/// `charge(T, E, s)` passes the setting clauses and the Exp* identity.
pub fn charge_suite(t: &Connector, tol: f64, fault: bool) -> Result<LawReport> {
    let e = standard_setting(&t.dst);
    let s = projection_section(&e, t)?;
    let t = if fault { corrupt_device(t)? } else { t.clone() };
    let ch = charge(&t, &e, &s)?;
    let mut r = check_setting(&ch, &t.src, tol);
    r.law = "charge".into();
    r.absorb(charge_star_check(&t, &e, &s, tol));
    Ok(r)
}

/// `charge(T∘S) = charge(S)∘charge(T)` with projection sections; with
/// `fault`, the composite offered is built from a corrupted `T`.
pub fn charge_compose_suite(t: &Connector, s: &Connector, tol: f64, fault: bool) -> Result<LawReport> {
    let q = standard_setting(&t.dst);
    if fault {
        let ts = compose_connectors(&corrupt_device(t)?, s)?;
        return charge_compose_check_with(t, s, &ts, &q, tol);
    }
    charge_compose_check(t, s, &q, tol)
}

/// Charge transfer along every registered context morphism, seen from a
/// one-object category.
pub fn charge_transfer_suite(ctx: &FlowContexts, a: &Species, t: &Connector, tol: f64, fault: bool) -> Result<LawReport> {
    let mut r = LawReport::new("charge transfer");
    let cat = a.ctx().clone();
    let pt = poset_category("pt", 1);
    let t = if fault { corrupt_device(t)? } else { t.clone() };
    let q = standard_setting(&t.dst);
    for m in &ctx.morphisms {
        let h = ctx.mor_handle(m);
        let konst = |target: ObjHandle| {
            let (t1, c1) = (target.clone(), cat.clone());
            FunctorMap::new(format!("const {}", target.id), pt.clone(), cat.clone(), move |_| t1.clone(), move |_: &MorHandle| c1.identity(&target))
        };
        let (x, y) = (konst(h.dom.clone()), konst(h.cod.clone()));
        let h2 = h.clone();
        let l = NatTransMap::new(format!("L[{}]", m.label), x, y, move |_| h2.clone());
        r.absorb(charge_transfer_check(&t, &l, &q, tol)?);
    }
    Ok(r)
}

// ---------- cosmology

/// Hubble factorization on sampled factors, against `analytic` (the
/// fixture's own scale unless corrupted).
pub fn hubble_suite(factors: &FactorSamples, analytic: &ScaleFunction, tol: f64) -> LawReport {
    hubble_factorization_check(&factors.series(analytic), tol)
}

pub fn acceleration_suite(factors: &FactorSamples, analytic: &ScaleFunction, tol: f64) -> LawReport {
    acceleration_check(&factors.series(analytic), tol)
}

pub fn positivity_suite(factors: &FactorSamples, analytic: &ScaleFunction) -> LawReport {
    positivity_check(&factors.series(analytic), analytic)
}

/// A scale function differing from `s` only in its rate: `e^{1.01H₀t}`,
/// `t^{1.01a}`, or for custom scales the matter-dominated `t^{2/3}`.
pub fn perturbed_scale(s: &ScaleFunction) -> ScaleFunction {
    match &s.kind {
        crate::cosmo::ScaleKind::Exponential { h0 } => ScaleFunction::exponential(1.01 * h0),
        crate::cosmo::ScaleKind::Power { a } => ScaleFunction::power(1.01 * a),
        crate::cosmo::ScaleKind::Custom { .. } => ScaleFunction::power(2.0 / 3.0),
    }
}

/// A scale function of opposite acceleration sign to `s` near `t₀`.
pub fn flipped_scale(s: &ScaleFunction, t0: f64) -> ScaleFunction {
    if s.ddf(t0) > 0.0 {
        ScaleFunction::power(2.0 / 3.0)
    } else {
        ScaleFunction::exponential(0.5)
    }
}

/// `f = 1 + 0.3|t − t*|^{2.5}`, whose third derivative jumps at `t*`.
pub fn kinked_scale(t_star: f64) -> ScaleFunction {
    ScaleFunction::custom(
        format!("1+0.3|t-{t_star}|^2.5"),
        move |t| 1.0 + 0.3 * (t - t_star).abs().powf(2.5),
        move |t| 0.75 * (t - t_star).signum() * (t - t_star).abs().powf(1.5),
        move |t| 1.125 * (t - t_star).abs().sqrt(),
    )
}

/// Observed RK4 order of the geodesic integrator under step halving, for
/// each `(spacetime, initial state)`, within `band` of 4.
pub fn rk4_order_suite(cases: &[(RWSpacetime, Vec<f64>)], h: f64, n: usize, band: f64) -> LawReport {
    let mut r = LawReport::new("RK4 order");
    for (rw, init) in cases {
        match convergence_order(rw, init, h, n) {
            Ok(p) => r.record(p - 4.0, band, || (vec![rw.scale.describe()], vec![format!("h={h}")], format!("order {p:.3}"), "4".into())),
            Err(e) => r.record_bool(false, || (vec![rw.scale.describe()], vec![], e.to_string(), "integrable".into())),
        }
    }
    r
}

/// Default step-halving cases: a timelike geodesic of `e^{0.5t}` and of `t^{2/3}`.
pub fn rk4_cases() -> Result<Vec<(RWSpacetime, Vec<f64>)>> {
    [ScaleFunction::exponential(0.5), ScaleFunction::power(2.0 / 3.0)]
        .into_iter()
        .map(|s| {
            let rw = RWSpacetime::new((0.1, 6.0), 1, 0, s)?;
            let mut init = vec![0.5, 0.0];
            init.extend(rw.momentum_velocity(&init, &[0.8], 1.0));
            Ok((rw, init))
        })
        .collect()
}

/// A geodesic crossing the kink of [`kinked_scale`] at `t = 1`.
pub fn rk4_kinked_case() -> Result<(RWSpacetime, Vec<f64>)> {
    let rw = RWSpacetime::new((0.1, 6.0), 1, 0, kinked_scale(1.0))?;
    let mut init = vec![0.5, 0.0];
    init.extend(rw.momentum_velocity(&init, &[0.8], 1.0));
    Ok((rw, init))
}

/// Geodesics of the fixture's spacetime mapped by a spatial translation
/// and reflection stay geodesics; with `fault`, by the stretch `x ↦ 1.5x`.
pub fn geodesic_relatedness_suite(fx: &RwFixture, tol: f64, fault: bool) -> Result<LawReport> {
    let rw = &fx.rw;
    let n = rw.spatial_dim;
    let curves = [0.2, 0.7, 1.3]
        .iter()
        .map(|&p| {
            let mut init = fx.cfg.seed.clone();
            let mut mom = vec![0.0; n];
            mom[0] = p;
            init.extend(rw.momentum_velocity(&fx.cfg.seed, &mom, 1.0));
            geodesic_integrate(rw, &init, 0.002, 200)
        })
        .collect::<Result<Vec<_>>>()?;
    let maps: Vec<PointMap> = if fault {
        vec![PointMap::custom("x↦1.5x", |p: &[f64]| std::iter::once(p[0]).chain(p[1..].iter().map(|x| 1.5 * x)).collect())]
    } else {
        let mut shift = vec![0.0; n + 1];
        shift[1] = 2.0;
        vec![
            PointMap::translation(&shift),
            PointMap::custom("x↦−x", |p: &[f64]| std::iter::once(p[0]).chain(p[1..].iter().map(|x| -x)).collect()),
        ]
    };
    let mut r = LawReport::new("geodesic relatedness");
    for phi in &maps {
        r.absorb(geodesic_relatedness_check(rw, phi, &curves, tol));
    }
    Ok(r)
}

/// At least one violation, each naming an object or morphism.
pub fn fault_located(r: &LawReport) -> bool {
    !r.violations.is_empty() && r.violations.iter().all(|v| !v.objects.is_empty() || !v.morphisms.is_empty())
}
