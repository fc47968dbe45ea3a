//! Scenario files: JSON configuration of fixtures and an ordered list of
//! checks, run into a deterministic report and an optional Hubble series.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::PointMap;
use crate::category::{CatMorphism, SamplerConfig};
use crate::cosmo::{RwFixture, RwToyConfig, ScaleFunction, ToyConfig, QuantumToy, build_toy_connector, HubbleSeries};
use crate::error::{Error, Result};
use crate::flow::{lattice_grid, FlowContexts, Region, VectorFieldModel, VfMorphism, VfObject};
use crate::report::{LawReport, Violation};
use crate::species::{Connector, Species};
use crate::suites::{self, MatrixConfig, MatrixFixture};

/// Violations kept per check in a report; the total is always given.
pub const MAX_REPORTED_VIOLATIONS: usize = 100;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub matrix: Option<MatrixConfig>,
    #[serde(default)]
    pub flow: Option<FlowConfig>,
    #[serde(default)]
    pub toy: Option<FlowToyConfig>,
    #[serde(default)]
    pub cosmology: Option<CosmologyConfig>,
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub id: String,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Run against the check's deliberately corrupted instance.
    #[serde(default)]
    pub fault: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub objects: Vec<ObjectConfig>,
    #[serde(default)]
    pub morphisms: Vec<MorphismConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    pub label: String,
    pub field: FieldConfig,
    pub regions: Vec<RegionConfig>,
    pub time_grid: TimeGrid,
}

/// `translation` with `data = v`, or `linear` with `data` the rows of `A`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: String,
    pub data: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub label: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub margin: Option<f64>,
}

fn default_grid_n() -> usize {
    4
}

/// The symmetric lattice `{k·step : |k| ≤ count}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub step: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismConfig {
    pub label: String,
    pub src: String,
    pub dst: String,
    pub affine: AffineConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineConfig {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Block-orbit quantum toys on the flow contexts, one per listed context.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowToyConfig {
    pub points: BTreeMap<String, Vec<f64>>,
    pub orbit_len: usize,
    pub delta: f64,
    #[serde(default = "one")]
    pub lambda: usize,
    #[serde(default = "two")]
    pub block: usize,
    #[serde(default = "omega")]
    pub omega: f64,
}

fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn omega() -> f64 {
    0.7
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosmologyConfig {
    pub scale: ScaleConfig,
    pub interval: (f64, f64),
    #[serde(default = "one")]
    pub spatial_dim: usize,
    pub geodesic: GeodesicConfig,
    pub quantum: QuantumConfig,
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
    /// Index `k` of the spatial frame vector used in the series.
    #[serde(default)]
    pub frame: usize,
    #[serde(default = "unit_strength")]
    pub strength: f64,
}

fn unit_strength() -> f64 {
    1.0
}

/// `exponential [H₀]`, `power [a]`, `gaussian [a]` (`e^{at²}`) or `minkowski []`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    /// `α(0) = (t, x…)`.
    pub init: Vec<f64>,
    pub momentum: Vec<f64>,
    #[serde(default = "one_f")]
    pub mu: f64,
    pub h: f64,
    /// Grid size of the sampled trajectory (orbit length of the toy).
    pub steps: usize,
    /// Base step and step count of the order study.
    #[serde(default = "order_h")]
    pub order_h: f64,
    #[serde(default = "order_steps")]
    pub order_steps: usize,
}

fn one_f() -> f64 {
    1.0
}
fn order_h() -> f64 {
    0.1
}
fn order_steps() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumConfig {
    /// Size of the matrix block at each orbit point.
    pub d: usize,
    pub delta: f64,
    /// Must equal `geodesic.init` when given: the orbit is seeded there.
    #[serde(default)]
    pub seed_point: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub lambda: usize,
    #[serde(default = "omega")]
    pub omega: f64,
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))
}

/// Which fixture a check runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    Nothing,
    Matrix,
    Flow,
    Toy,
    Cosmology,
}

pub struct CheckInfo {
    pub id: &'static str,
    pub paper_ref: &'static str,
    pub default_tol: f64,
    pub needs: Needs,
}

const fn info(id: &'static str, paper_ref: &'static str, default_tol: f64, needs: Needs) -> CheckInfo {
    CheckInfo { id, paper_ref, default_tol, needs }
}

pub const CHECKS: &[CheckInfo] = &[
    info("dp-associativity", "dp composition associativity", 1e-12, Needs::Matrix),
    info("dp-unitality", "dp composition unit laws", 1e-12, Needs::Matrix),
    info("chdv-unit-neutrality", "Chdv units are neutral", 1e-12, Needs::Matrix),
    info("interchange", "interchange law for natural transformations", 1e-12, Needs::Matrix),
    info("psi-functoriality", "Psi: dp -> Chdv is a functor", 1e-12, Needs::Matrix),
    info("dagger-contravariance", "dagger reverses composition", 1e-12, Needs::Matrix),
    info("propensity-range", "propensities lie in [0, 1]", 1e-12, Needs::Nothing),
    info("interference", "interference identity with defect term", 1e-12, Needs::Nothing),
    info("spectral-reconstruction", "spectral measure reconstructs omega(O)", 1e-10, Needs::Nothing),
    info("mean-value-scale", "mean values are invariant under rescaling", 0.0, Needs::Nothing),
    info("flow-category-laws", "dynamical and context categories are categories", 1e-9, Needs::Flow),
    info("flow-naturality", "flow maps commute with context morphisms", 1e-9, Needs::Flow),
    info("flow-functor", "region dynamics F_[M,U] is a functor", 1e-9, Needs::Flow),
    info("species-functoriality", "the flow species is a functor", 1e-9, Needs::Flow),
    info("bracket-relatedness", "brackets of related fields are related", 1e-5, Needs::Flow),
    info("setting", "standard experimental setting clauses", 1e-9, Needs::Flow),
    info("equiformity", "equiformity of the identity connector", 1e-9, Needs::Flow),
    info("equiformity-toy", "equiformity of the classical-to-quantum toy", 1e-9, Needs::Toy),
    info("charge", "charge is a setting and preserves Exp*", 1e-9, Needs::Flow),
    info("charge-compose", "charge of a composite connector", 1e-9, Needs::Flow),
    info("charge-transfer", "charge transfer along context morphisms", 1e-9, Needs::Flow),
    info("equiformity-rk4", "equiformity of the toy on a geodesic field", 1e-6, Needs::Cosmology),
    info("hubble-factorization", "Hubble factor as c_k / q_k", 1e-5, Needs::Cosmology),
    info("acceleration", "acceleration from quantum factors vs f''/f", 1e-4, Needs::Cosmology),
    info("positivity", "acceleration positivity verdict vs sign of f''", 0.0, Needs::Cosmology),
    info("rk4-order", "geodesic integrator has order four", 0.3, Needs::Cosmology),
    info("geodesic-relatedness", "spatial isometries map geodesics to geodesics", 1e-6, Needs::Cosmology),
];

pub fn check_info(id: &str) -> Option<&'static CheckInfo> {
    CHECKS.iter().find(|c| c.id == id)
}

/// `id<TAB>paper_ref<TAB>default tol` per registered check.
pub fn list_checks() -> String {
    CHECKS.iter().map(|c| format!("{}\t{}\t{:e}\n", c.id, c.paper_ref, c.default_tol)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub paper_ref: String,
    pub pass: bool,
    pub instances: usize,
    pub max_delta: f64,
    pub violations: Vec<Violation>,
    pub violations_total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_applicable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tol_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: None, tol_scale: 1.0 }
    }
}

/// Report plus the Hubble series (if a cosmology check ran).
pub struct RunOutput {
    pub report: Report,
    pub series: Option<HubbleSeries>,
}

struct Fixtures {
    seed: u64,
    sampler: SamplerConfig,
    matrix: Option<(MatrixConfig, MatrixFixture)>,
    flow: Option<(FlowContexts, Species)>,
    toy: Option<Connector>,
    cosmo: Option<(CosmologyConfig, RwFixture)>,
}

const FLOW_TOL: f64 = 1e-9;
const MATRIX_TOL: f64 = 1e-12;

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn field_model(label: &str, f: &FieldConfig) -> Result<VectorFieldModel> {
    let bad = |what: &str| cfg_err(format!("flow.objects[{label}].field: {what}"));
    match f.kind.as_str() {
        "translation" => {
            let v: Vec<f64> = serde_json::from_value(f.data.clone()).map_err(|e| bad(&format!("data must be a vector ({e})")))?;
            if v.is_empty() {
                return Err(bad("data must be nonempty"));
            }
            Ok(VectorFieldModel::translation(format!("{v:?}"), v))
        }
        "linear" => {
            let rows: Vec<Vec<f64>> = serde_json::from_value(f.data.clone()).map_err(|e| bad(&format!("data must be a matrix ({e})")))?;
            let a = square(&rows).ok_or_else(|| bad("data must be a nonempty square matrix"))?;
            Ok(VectorFieldModel::linear(format!("linear{rows:?}"), a))
        }
        k => Err(bad(&format!("unknown kind {k:?}; expected \"translation\" or \"linear\""))),
    }
}

fn square(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let n = rows.len();
    (n > 0 && rows.iter().all(|r| r.len() == n)).then(|| DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(cfg_err(format!("{what} must be positive, got {x}")))
    }
}

pub fn build_flow(cfg: &FlowConfig) -> Result<FlowContexts> {
    if cfg.objects.is_empty() {
        return Err(cfg_err("flow.objects must be nonempty"));
    }
    let mut objects = Vec::new();
    for o in &cfg.objects {
        let field = field_model(&o.label, &o.field)?;
        let regions = o
            .regions
            .iter()
            .map(|r| {
                if r.lo.len() != field.dim || r.hi.len() != field.dim {
                    return Err(cfg_err(format!("flow.objects[{}].regions[{}]: dimension differs from the field's {}", o.label, r.label, field.dim)));
                }
                Region::new(r.label.clone(), r.lo.clone(), r.hi.clone(), r.grid_n, r.margin)
                    .map_err(|e| cfg_err(format!("flow.objects[{}].regions[{}]: {e}", o.label, r.label)))
            })
            .collect::<Result<Vec<_>>>()?;
        positive(&format!("flow.objects[{}].time_grid.step", o.label), o.time_grid.step)?;
        let grid = lattice_grid(o.time_grid.step, o.time_grid.count);
        objects.push(VfObject::new(o.label.clone(), field, regions, grid).map_err(|e| cfg_err(format!("flow.objects[{}]: {e}", o.label)))?);
    }
    let mut morphisms = Vec::new();
    for m in &cfg.morphisms {
        let find = |l: &str| objects.iter().find(|o| o.label == l).ok_or_else(|| cfg_err(format!("flow.morphisms[{}]: unknown object {l:?}", m.label)));
        let (src, dst) = (find(&m.src)?, find(&m.dst)?);
        let n = dst.dim();
        if m.affine.a.len() != src.dim() || m.affine.a.iter().any(|r| r.len() != n) || m.affine.b.len() != src.dim() {
            return Err(cfg_err(format!("flow.morphisms[{}].affine: expected A of shape {}x{} and b of length {}", m.label, src.dim(), n, src.dim())));
        }
        let a = DMatrix::from_fn(src.dim(), n, |i, j| m.affine.a[i][j]);
        let phi = PointMap::affine(a, DVector::from_vec(m.affine.b.clone()));
        morphisms.push(VfMorphism::new(m.label.clone(), src, dst, phi).map_err(|e| cfg_err(format!("flow.morphisms[{}]: {e}", m.label)))?);
    }
    FlowContexts::new(objects, morphisms).map_err(|e| cfg_err(format!("flow: {e}")))
}

pub fn scale_function(s: &ScaleConfig) -> Result<ScaleFunction> {
    let want = |n: usize| -> Result<()> {
        if s.params.len() == n && s.params.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(cfg_err(format!("cosmology.scale: kind {:?} takes {n} finite parameter(s), got {:?}", s.kind, s.params)))
        }
    };
    match s.kind.as_str() {
        "exponential" => want(1).map(|_| ScaleFunction::exponential(s.params[0])),
        "power" => want(1).map(|_| ScaleFunction::power(s.params[0])),
        "gaussian" => want(1).map(|_| ScaleFunction::gaussian(s.params[0])),
        "minkowski" => want(0).map(|_| ScaleFunction::minkowski()),
        k => Err(cfg_err(format!("cosmology.scale: unknown kind {k:?}; expected exponential, power, gaussian or minkowski"))),
    }
}

pub fn build_cosmology(c: &CosmologyConfig, sampler: SamplerConfig) -> Result<RwFixture> {
    let scale = scale_function(&c.scale)?;
    let g = &c.geodesic;
    let n = c.spatial_dim;
    if g.init.len() != n + 1 || g.momentum.len() != n {
        return Err(cfg_err(format!("cosmology.geodesic: init needs {} and momentum {} entries", n + 1, n)));
    }
    if let Some(p) = &c.quantum.seed_point {
        if p != &g.init {
            return Err(cfg_err("cosmology.quantum.seed_point must equal geodesic.init".to_string()));
        }
    }
    positive("cosmology.geodesic.h", g.h)?;
    positive("cosmology.quantum.delta", c.quantum.delta)?;
    positive("cosmology.strength", c.strength)?;
    if c.frame >= n {
        return Err(cfg_err(format!("cosmology.frame {} out of range for spatial_dim {n}", c.frame)));
    }
    let mut cfg = RwToyConfig::new(scale, c.interval);
    cfg.spatial_dim = n;
    cfg.seed = g.init.clone();
    cfg.momentum = g.momentum.clone();
    cfg.mu = g.mu;
    cfg.h = g.h;
    cfg.toy = ToyConfig { orbit_len: g.steps, delta: c.quantum.delta, lambda: c.quantum.lambda, block: c.quantum.d, omega: c.quantum.omega };
    cfg.shift = c.shift.clone().unwrap_or_else(|| {
        let mut s = vec![0.0; n];
        s[0] = 0.3;
        s
    });
    RwFixture::build(cfg, sampler, FLOW_TOL).map_err(|e| cfg_err(format!("cosmology: {e}")))
}

/// Context samplers must hold identities and a non-identity morphism
/// before equiformity-type checks are meaningful.
fn validate_equiformity_sampler(a: &Species, what: &str) -> Result<()> {
    let cat = a.ctx();
    let is_id = |m: &crate::category::MorHandle| m.dom().id == m.cod().id && cat.distance(m, &cat.identity(&m.dom())) == 0.0;
    let ms = &cat.sampler().morphisms;
    let ids = ms.iter().any(is_id);
    let non_id = ms.iter().any(|m| !is_id(m));
    if ids && non_id {
        Ok(())
    } else {
        Err(cfg_err(format!("{what}: the context sampler needs identities and at least one non-identity morphism")))
    }
}

impl Fixtures {
    fn build(s: &Scenario, seed: u64) -> Result<Self> {
        let sampler = SamplerConfig { seed, ..SamplerConfig::default() };
        let needs: Vec<Needs> = s
            .checks
            .iter()
            .map(|c| check_info(&c.id).map(|i| i.needs).ok_or_else(|| cfg_err(format!("checks: unknown id {:?} (see --list-checks)", c.id))))
            .collect::<Result<_>>()?;
        for c in &s.checks {
            if let Some(t) = c.tol {
                positive(&format!("checks[{}].tol", c.id), t)?;
            }
        }
        let need = |n: Needs| needs.contains(&n);
        let matrix = if need(Needs::Matrix) {
            let cfg = s.matrix.clone().unwrap_or_default();
            let fx = suites::matrix_fixture(&cfg, seed, MATRIX_TOL)?;
            Some((cfg, fx))
        } else {
            None
        };
        let flow = if need(Needs::Flow) || need(Needs::Toy) {
            let f = s.flow.as_ref().ok_or_else(|| cfg_err("flow checks requested but no \"flow\" section"))?;
            let ctx = build_flow(f)?;
            let a = ctx.species(sampler, FLOW_TOL);
            Some((ctx, a))
        } else {
            None
        };
        let toy = match (&flow, &s.toy) {
            (Some((ctx, a)), Some(t)) => {
                let cfg = ToyConfig { orbit_len: t.orbit_len, delta: t.delta, lambda: t.lambda, block: t.block, omega: t.omega };
                positive("toy.delta", t.delta)?;
                let toys = t
                    .points
                    .iter()
                    .map(|(label, p)| {
                        ctx.object(label).ok_or_else(|| cfg_err(format!("toy.points: unknown context {label:?}")))?;
                        QuantumToy::new(ctx, label, p.clone(), cfg).map_err(|e| cfg_err(format!("toy.points[{label}]: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if toys.len() != ctx.objects.len() {
                    return Err(cfg_err("toy.points must give a point for every flow context"));
                }
                Some(build_toy_connector(ctx, a, toys, FLOW_TOL).map_err(|e| cfg_err(format!("toy: {e}")))?)
            }
            (None, Some(_)) => None,
            (_, None) if need(Needs::Toy) => return Err(cfg_err("equiformity-toy requested but no \"toy\" section")),
            _ => None,
        };
        let cosmo = if need(Needs::Cosmology) {
            let c = s.cosmology.as_ref().ok_or_else(|| cfg_err("cosmology checks requested but no \"cosmology\" section"))?;
            Some((c.clone(), build_cosmology(c, sampler)?))
        } else {
            None
        };
        let fx = Fixtures { seed, sampler, matrix, flow, toy, cosmo };
        for c in &s.checks {
            match c.id.as_str() {
                "equiformity" | "equiformity-toy" | "charge" | "charge-compose" | "charge-transfer" => {
                    validate_equiformity_sampler(&fx.flow.as_ref().expect("built above").1, &c.id)?
                }
                "equiformity-rk4" => validate_equiformity_sampler(&fx.cosmo.as_ref().expect("built above").1.connector.src, &c.id)?,
                _ => {}
            }
        }
        Ok(fx)
    }

    fn matrix(&self) -> &(MatrixConfig, MatrixFixture) {
        self.matrix.as_ref().expect("built for matrix checks")
    }
    fn flow(&self) -> &(FlowContexts, Species) {
        self.flow.as_ref().expect("built for flow checks")
    }
    fn cosmo(&self) -> &(CosmologyConfig, RwFixture) {
        self.cosmo.as_ref().expect("built for cosmology checks")
    }

    /// The toy connector when configured, otherwise the identity.
    fn connector(&self) -> Connector {
        self.toy.clone().unwrap_or_else(|| Connector::identity(&self.flow().1))
    }

    fn run(&self, id: &str, tol: f64, fault: bool) -> Result<LawReport> {
        let seed = self.seed;
        Ok(match id {
            "dp-associativity" => suites::dp_associativity(&self.matrix().1, tol, fault)?,
            "dp-unitality" => suites::dp_unitality(&self.matrix().1, tol, fault)?,
            "chdv-unit-neutrality" => suites::chdv_unit_neutrality(&self.matrix().1, tol, fault)?,
            "interchange" => suites::interchange_suite(&self.matrix().1, &self.matrix().0, 600, tol, fault)?,
            "psi-functoriality" => suites::psi_suite(&self.matrix().1, tol, fault),
            "dagger-contravariance" => suites::dagger_suite(&self.matrix().1, 600, tol, fault)?,
            "propensity-range" => suites::propensity_suite(seed, tol, fault)?,
            "interference" => suites::interference_suite(seed, tol, fault)?,
            "spectral-reconstruction" => suites::spectral_suite(seed, tol, fault)?,
            "mean-value-scale" => suites::mean_value_suite(seed, fault)?,
            "flow-category-laws" if fault => return Err(cfg_err("flow-category-laws has no fault variant; dp-associativity exercises the same checker")),
            "flow-category-laws" => suites::flow_category_laws(&self.flow().0, self.sampler, tol),
            "flow-naturality" => suites::flow_naturality_suite(&self.flow().0, tol, fault),
            "flow-functor" => suites::flow_functor_suite(&self.flow().0, tol, fault),
            "species-functoriality" => suites::species_suite(&self.flow().0, self.sampler, tol, fault),
            "bracket-relatedness" => suites::bracket_suite(&self.flow().0, 1e-4, tol, fault)?,
            "setting" => suites::setting_suite(&self.flow().1, tol, fault),
            "equiformity" => suites::equiformity_suite(&Connector::identity(&self.flow().1), tol, fault)?,
            "equiformity-toy" => suites::equiformity_suite(self.toy.as_ref().expect("validated"), tol, fault)?,
            "charge" => suites::charge_suite(&self.connector(), tol, fault)?,
            "charge-compose" => {
                let t = self.connector();
                suites::charge_compose_suite(&t, &Connector::identity(&t.src), tol, fault)?
            }
            "charge-transfer" => {
                let (ctx, a) = self.flow();
                suites::charge_transfer_suite(ctx, a, &self.connector(), tol, fault)?
            }
            "equiformity-rk4" => suites::equiformity_suite(&self.cosmo().1.connector, tol, fault)?,
            "hubble-factorization" | "acceleration" | "positivity" => {
                let (c, fx) = self.cosmo();
                let f = fx.factors(c.frame, c.strength)?;
                let truth = &fx.rw.scale;
                match (id, fault) {
                    ("hubble-factorization", false) => suites::hubble_suite(&f, truth, tol),
                    ("hubble-factorization", true) => suites::hubble_suite(&f, &suites::perturbed_scale(truth), tol),
                    ("acceleration", false) => suites::acceleration_suite(&f, truth, tol),
                    ("acceleration", true) => suites::acceleration_suite(&f, &suites::perturbed_scale(truth), tol),
                    (_, false) => suites::positivity_suite(&f, truth),
                    (_, true) => suites::positivity_suite(&f, &suites::flipped_scale(truth, fx.cfg.seed[0])),
                }
            }
            "rk4-order" => {
                let (c, fx) = self.cosmo();
                let case = if fault {
                    suites::rk4_kinked_case()?
                } else {
                    let mut init = fx.cfg.seed.clone();
                    init.extend(fx.rw.momentum_velocity(&fx.cfg.seed, &fx.cfg.momentum, fx.cfg.mu));
                    (fx.rw.clone(), init)
                };
                suites::rk4_order_suite(&[case], c.geodesic.order_h, c.geodesic.order_steps, tol)
            }
            "geodesic-relatedness" => suites::geodesic_relatedness_suite(&self.cosmo().1, tol, fault)?,
            other => return Err(cfg_err(format!("checks: unknown id {other:?}"))),
        })
    }
}

fn result(id: &str, r: LawReport) -> CheckResult {
    let info = check_info(id).expect("registered");
    let total = r.violations.len();
    let mut violations = r.violations;
    violations.truncate(MAX_REPORTED_VIOLATIONS);
    CheckResult {
        id: id.to_string(),
        paper_ref: info.paper_ref.to_string(),
        pass: total == 0,
        instances: r.instances_checked,
        max_delta: r.max_delta,
        violations,
        violations_total: total,
        not_applicable: r.not_applicable,
    }
}

/// Run every check of `s` in order. Configuration problems are
/// [`Error::Config`]; a check that errors while running is reported as
/// one failed instance.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<RunOutput> {
    if !(opts.tol_scale.is_finite() && opts.tol_scale > 0.0) {
        return Err(cfg_err(format!("--tol-scale must be positive, got {}", opts.tol_scale)));
    }
    let seed = opts.seed.unwrap_or(s.seed);
    let fx = Fixtures::build(s, seed)?;
    let mut checks = Vec::new();
    for c in &s.checks {
        let info = check_info(&c.id).expect("validated");
        let tol = c.tol.unwrap_or(info.default_tol) * opts.tol_scale;
        let r = match fx.run(&c.id, tol, c.fault) {
            Ok(r) => r,
            Err(Error::Config(m)) => return Err(Error::Config(m)),
            Err(e) => {
                let mut r = LawReport::new(info.paper_ref);
                r.record_bool(false, || (vec![], vec![c.id.clone()], format!("error: {e}"), "check completes".into()));
                r
            }
        };
        checks.push(result(&c.id, r));
    }
    let series = match &fx.cosmo {
        Some((c, rw)) if s.checks.iter().any(|k| matches!(k.id.as_str(), "hubble-factorization" | "acceleration" | "positivity")) => {
            Some(rw.series(c.frame, c.strength)?)
        }
        _ => None,
    };
    Ok(RunOutput { report: Report { scenario: s.name.clone(), seed, timestamp: None, checks }, series })
}

/// Pretty JSON with a trailing newline.
pub fn report_json(r: &Report) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}
