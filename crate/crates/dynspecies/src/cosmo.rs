//! Robertson–Walker spacetimes with flat spatial sections, their geodesics,
//! a block-orbit quantum model over flow contexts, and the quantum and
//! classical factors of the Hubble parameter.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::algebra::{c, AlgebraElement, CMat, FnExpr, Functional, Point, PointMap, PositiveMap, StarAlgebra};
use crate::category::{CatMorphism, FunctorMap, LazyCategory, MorHandle, ObjHandle, Payload, SamplerConfig};
use crate::error::{Error, Result};
use crate::flow::{certify, lattice_grid, payload_affine, region_handle_time, rk4_step, FlowContexts, Region, VectorFieldModel, VfMorphism, VfObject};
use crate::pattern::{chdv_category, psi, DpMorphism, DynamicalPattern};
use crate::report::LawReport;
use crate::species::{Connector, Species};

/// Local Hubble constant carried as metadata: value and uncertainty in km s⁻¹ Mpc⁻¹.
pub const HUBBLE_CONSTANT: (f64, f64) = (73.02, 1.79);

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ScaleKind {
    /// `e^{H₀t}`.
    Exponential { h0: f64 },
    /// `tᵃ` on `t > 0`.
    Power { a: f64 },
    Custom { name: String, f: ScalarFn, df: ScalarFn, ddf: ScalarFn },
}

/// A scale function `f` with its first two derivatives.
#[derive(Clone)]
pub struct ScaleFunction {
    pub kind: ScaleKind,
}

impl fmt::Debug for ScaleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScaleFunction({})", self.describe())
    }
}

impl ScaleFunction {
    pub fn exponential(h0: f64) -> Self {
        ScaleFunction { kind: ScaleKind::Exponential { h0 } }
    }

    pub fn power(a: f64) -> Self {
        ScaleFunction { kind: ScaleKind::Power { a } }
    }

    /// `f ≡ 1`.
    pub fn minkowski() -> Self {
        Self::exponential(0.0)
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        ddf: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScaleFunction { kind: ScaleKind::Custom { name: name.into(), f: Arc::new(f), df: Arc::new(df), ddf: Arc::new(ddf) } }
    }

    /// `exp(a t²)`: its Hubble parameter `2at` is increasing for `a > 0`.
    pub fn gaussian(a: f64) -> Self {
        Self::custom(
            format!("exp({a}·t²)"),
            move |t| (a * t * t).exp(),
            move |t| 2.0 * a * t * (a * t * t).exp(),
            move |t| (2.0 * a + 4.0 * a * a * t * t) * (a * t * t).exp(),
        )
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ScaleKind::Exponential { h0 } => format!("exp({h0}·t)"),
            ScaleKind::Power { a } => format!("t^{a}"),
            ScaleKind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        match &self.kind {
            ScaleKind::Exponential { h0 } => (h0 * t).exp(),
            ScaleKind::Power { a } => t.powf(*a),
            ScaleKind::Custom { f, .. } => f(t),
        }
    }

    pub fn df(&self, t: f64) -> f64 {
        match &self.kind {
            ScaleKind::Exponential { h0 } => h0 * (h0 * t).exp(),
            ScaleKind::Power { a } => a * t.powf(a - 1.0),
            ScaleKind::Custom { df, .. } => df(t),
        }
    }

    pub fn ddf(&self, t: f64) -> f64 {
        match &self.kind {
            ScaleKind::Exponential { h0 } => h0 * h0 * (h0 * t).exp(),
            ScaleKind::Power { a } => a * (a - 1.0) * t.powf(a - 2.0),
            ScaleKind::Custom { ddf, .. } => ddf(t),
        }
    }

    /// `H = f′/f`.
    pub fn hubble(&self, t: f64) -> f64 {
        self.df(t) / self.f(t)
    }

    pub fn hubble_prime(&self, t: f64) -> f64 {
        let h = self.hubble(t);
        self.ddf(t) / self.f(t) - h * h
    }

    pub fn accel_ratio(&self, t: f64) -> f64 {
        self.ddf(t) / self.f(t)
    }

    /// Derivative descriptors against central differences, and
    /// `f″/f = H′ + H²` with `H′` differenced numerically.
    pub fn check_derivatives(&self, ts: &[f64], tol: f64) -> LawReport {
        let mut r = LawReport::new(format!("scale derivatives of {}", self.describe()));
        for &t in ts {
            let d = 1e-4 * t.abs().max(1.0);
            let scale = self.f(t).abs().max(self.df(t).abs()).max(1e-300);
            let cd1 = (self.f(t + d) - self.f(t - d)) / (2.0 * d);
            r.record((cd1 - self.df(t)) / scale, tol, || (vec![format!("t={t}")], vec![], format!("f′ = {}", self.df(t)), format!("Δf = {cd1}")));
            let scale2 = self.df(t).abs().max(self.ddf(t).abs()).max(1e-300);
            let cd2 = (self.df(t + d) - self.df(t - d)) / (2.0 * d);
            r.record((cd2 - self.ddf(t)) / scale2, tol, || (vec![format!("t={t}")], vec![], format!("f″ = {}", self.ddf(t)), format!("Δf′ = {cd2}")));
            let hp = (self.hubble(t + d) - self.hubble(t - d)) / (2.0 * d);
            let h = self.hubble(t);
            let lhs = self.accel_ratio(t);
            r.record((lhs - hp - h * h) / (1.0 + lhs.abs()), tol, || (vec![format!("t={t}")], vec![], format!("f″/f = {lhs}"), format!("H′+H² = {}", hp + h * h)));
        }
        r
    }
}

/// `M(x, f) = I ×_f S` with flat `S = ℝⁿ`, `n ∈ {1, 3}`.
#[derive(Debug, Clone)]
pub struct RWSpacetime {
    pub t_min: f64,
    pub t_max: f64,
    pub spatial_dim: usize,
    /// Recorded with the model; the spatial sections are flat whatever its value.
    pub sign: i8,
    pub scale: ScaleFunction,
}

impl RWSpacetime {
    pub fn new(interval: (f64, f64), spatial_dim: usize, sign: i8, scale: ScaleFunction) -> Result<Self> {
        let (t_min, t_max) = interval;
        if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::Config(format!("interval ({t_min}, {t_max}) is not a bounded open interval")));
        }
        if spatial_dim != 1 && spatial_dim != 3 {
            return Err(Error::Config(format!("spatial dimension {spatial_dim} is not 1 or 3")));
        }
        if !(-1..=1).contains(&sign) {
            return Err(Error::Config(format!("sign {sign} is not in {{-1, 0, 1}}")));
        }
        for i in 1..64 {
            let t = t_min + (t_max - t_min) * i as f64 / 64.0;
            let f = scale.f(t);
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::Precondition(format!("f({t}) = {f} is not positive")));
            }
        }
        Ok(RWSpacetime { t_min, t_max, spatial_dim, sign, scale })
    }

    pub fn dim(&self) -> usize {
        1 + self.spatial_dim
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t > self.t_min && t < self.t_max
    }

    /// `g(p)(u, v) = −u⁰v⁰ + f(t)² Σ uⁱvⁱ`.
    pub fn pairing(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let f = self.scale.f(p[0]);
        -u[0] * v[0] + f * f * (1..self.dim()).map(|i| u[i] * v[i]).sum::<f64>()
    }

    /// Geodesic equations on `(t, x, t′, x′)`.
    pub fn geodesic_rhs(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let (t, tp) = (y[0], y[n]);
        let (f, df) = (self.scale.f(t), self.scale.df(t));
        let xp2: f64 = (1..n).map(|i| y[n + i] * y[n + i]).sum();
        let mut out = Vec::with_capacity(2 * n);
        out.extend_from_slice(&y[n..]);
        out.push(-f * df * xp2);
        for i in 1..n {
            out.push(-2.0 * df / f * tp * y[n + i]);
        }
        out
    }

    /// Velocity `(√(μ + |P|²/f²), P/f²)` at `p`.
    pub fn momentum_velocity(&self, p: &[f64], momentum: &[f64], mu: f64) -> Vec<f64> {
        let f = self.scale.f(p[0]);
        let p2: f64 = momentum.iter().map(|x| x * x).sum();
        let mut v = vec![(mu + p2 / (f * f)).sqrt()];
        v.extend(momentum.iter().map(|x| x / (f * f)));
        v
    }

    /// The field whose integral curves are the geodesics with comoving
    /// momentum `P` and `g(V, V) = −μ`, flowed by RK4 with step `h`.
    pub fn momentum_field(&self, momentum: &[f64], mu: f64, h: f64) -> Result<VectorFieldModel> {
        if momentum.len() != self.spatial_dim {
            return Err(Error::Config(format!("momentum has {} components, expected {}", momentum.len(), self.spatial_dim)));
        }
        if !(h > 0.0) {
            return Err(Error::Config("step must be positive".into()));
        }
        let me = self.clone();
        let pm = momentum.to_vec();
        Ok(VectorFieldModel::numeric(format!("V[P={momentum:?}]"), self.dim(), h, move |p| me.momentum_velocity(p, &pm, mu)))
    }

    /// `∂_t`: the comoving observers.
    pub fn comoving_field(&self) -> VectorFieldModel {
        let mut v = vec![0.0; self.dim()];
        v[0] = 1.0;
        VectorFieldModel::translation("∂t", v)
    }
}

fn d1_5(v: &[f64], i: usize, h: f64) -> f64 {
    (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h)
}

fn d2_5(v: &[f64], i: usize, h: f64) -> f64 {
    (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / (12.0 * h * h)
}

/// Largest geodesic-equation defect at `i`, with derivatives of the sampled
/// positions taken by five-point central differences.
pub fn geodesic_residual(rw: &RWSpacetime, positions: &[Vec<f64>], h: f64, i: usize) -> Option<f64> {
    if i < 2 || i + 2 >= positions.len() {
        return None;
    }
    let n = rw.dim();
    let col = |k: usize| -> Vec<f64> { positions[i - 2..=i + 2].iter().map(|p| p[k]).collect() };
    let t = positions[i][0];
    let (f, df) = (rw.scale.f(t), rw.scale.df(t));
    let tc = col(0);
    let tp = d1_5(&tc, 2, h);
    let tpp = d2_5(&tc, 2, h);
    let mut xp2 = 0.0;
    let mut worst: f64 = 0.0;
    for k in 1..n {
        let xc = col(k);
        let (xp, xpp) = (d1_5(&xc, 2, h), d2_5(&xc, 2, h));
        xp2 += xp * xp;
        worst = worst.max((xpp + 2.0 * df / f * tp * xp).abs());
    }
    Some(worst.max((tpp + f * df * xp2).abs()))
}

/// Sampled geodesic `α(s)`, stored as `(t, x, t′, x′)` on a uniform grid
/// `s = s0 + i·h`.
#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    pub h: f64,
    pub s0: f64,
    pub dim: usize,
    pub states: Vec<Vec<f64>>,
}

impl GeodesicTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s0 + i as f64 * self.h
    }

    /// Grid index of parameter `s`, when `s` is a grid point.
    pub fn index_at(&self, s: f64) -> Option<usize> {
        let r = (s - self.s0) / self.h;
        let i = r.round();
        ((r - i).abs() <= 1e-6 && i >= 0.0 && (i as usize) < self.len()).then_some(i as usize)
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.states[i][..self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.states[i][self.dim..]
    }

    /// Galactic time `t = π∘α`.
    pub fn t(&self, i: usize) -> f64 {
        self.states[i][0]
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.position(i).to_vec()).collect()
    }

    fn column(&self, k: usize, i: usize) -> Vec<f64> {
        (i - 2..=i + 2).map(|j| self.states[j][k]).collect()
    }

    fn interior(&self, i: usize) -> Result<()> {
        if i < 2 || i + 2 >= self.len() {
            return Err(Error::Precondition(format!("index {i} has no five-point stencil in a trajectory of {} samples", self.len())));
        }
        Ok(())
    }

    /// `β′(s)` by central differences.
    pub fn beta_prime(&self, i: usize) -> Result<Vec<f64>> {
        self.interior(i)?;
        Ok((1..self.dim).map(|k| d1_5(&self.column(k, i), 2, self.h)).collect())
    }

    /// `β″(s)` by central differences.
    pub fn beta_second(&self, i: usize) -> Result<Vec<f64>> {
        self.interior(i)?;
        Ok((1..self.dim).map(|k| d2_5(&self.column(k, i), 2, self.h)).collect())
    }

    /// `e_k(s) = −½ f²(t) g_S(E_k, β″) (dt/ds)⁻¹` for the coordinate frame `E_k = ∂_{x_k}`.
    pub fn e_k(&self, rw: &RWSpacetime, k: usize, i: usize) -> Result<f64> {
        let bpp = self.beta_second(i)?;
        let bk = *bpp.get(k).ok_or_else(|| Error::Config(format!("frame index {k} exceeds spatial dimension {}", self.dim - 1)))?;
        let tp = self.velocity(i)[0];
        if tp.abs() < 1e-12 {
            return Err(Error::Precondition(format!("dt/ds vanishes at s = {}", self.s(i))));
        }
        let f = rw.scale.f(self.t(i));
        Ok(-0.5 * f * f * bk / tp)
    }

    /// Geodesic residual, drift of `g(α′, α′)`, and the warped pairing
    /// `g(Ē_k, α′) = f² g_S(E_k, β′)` on every interior sample.
    pub fn check(&self, rw: &RWSpacetime, tol: f64) -> LawReport {
        let mut r = LawReport::new("geodesic trajectory".to_string());
        if self.is_empty() {
            return r;
        }
        let positions = self.positions();
        let norm0 = rw.pairing(self.position(0), self.velocity(0), self.velocity(0));
        for i in 0..self.len() {
            let norm = rw.pairing(self.position(i), self.velocity(i), self.velocity(i));
            r.record(norm - norm0, tol, || (vec![format!("s={}", self.s(i))], vec![], format!("g(α′,α′) = {norm}"), format!("initial {norm0}")));
            if let Some(res) = geodesic_residual(rw, &positions, self.h, i) {
                r.record(res, tol, || (vec![format!("s={}", self.s(i))], vec![], "geodesic equations".into(), "0".into()));
                let f = rw.scale.f(self.t(i));
                let bp = self.beta_prime(i).expect("interior");
                for (k, b) in bp.iter().enumerate() {
                    let mut e = vec![0.0; self.dim];
                    e[1 + k] = 1.0;
                    let lhs = rw.pairing(self.position(i), &e, self.velocity(i));
                    let rhs = f * f * b;
                    r.record(lhs - rhs, tol, || (vec![format!("s={}", self.s(i))], vec![format!("E_{k}")], format!("g(Ē,α′) = {lhs}"), format!("f² g_S(E,β′) = {rhs}")));
                }
            }
        }
        r
    }
}

fn check_state(rw: &RWSpacetime, y: &[f64]) -> Result<()> {
    let t = y[0];
    if !rw.contains_time(t) || !y.iter().all(|v| v.is_finite()) {
        return Err(Error::LeftInterval(t));
    }
    Ok(())
}

/// RK4 integration of the geodesic equations from `init = (t, x, t′, x′)`
/// over `n` steps of `h`.
pub fn geodesic_integrate(rw: &RWSpacetime, init: &[f64], h: f64, n: usize) -> Result<GeodesicTrajectory> {
    geodesic_integrate_window(rw, init, h, 0, n)
}

/// As [`geodesic_integrate`], also stepping `back` steps into negative `s`.
pub fn geodesic_integrate_window(rw: &RWSpacetime, init: &[f64], h: f64, back: usize, fwd: usize) -> Result<GeodesicTrajectory> {
    const BUDGET: usize = 10_000_000;
    let dim = rw.dim();
    if init.len() != 2 * dim {
        return Err(Error::Config(format!("initial state has {} entries, expected {}", init.len(), 2 * dim)));
    }
    if !(h > 0.0) {
        return Err(Error::Config("step must be positive".into()));
    }
    if back + fwd > BUDGET {
        return Err(Error::StepBudget(format!("{} steps requested, budget {BUDGET}", back + fwd)));
    }
    if !(init[dim] > 0.0) {
        return Err(Error::Precondition(format!("dt/ds = {} is not future pointing", init[dim])));
    }
    check_state(rw, init)?;
    let rhs = |y: &[f64]| rw.geodesic_rhs(y);
    let mut before = Vec::with_capacity(back);
    let mut y = init.to_vec();
    for _ in 0..back {
        y = rk4_step(&rhs, &y, -h);
        check_state(rw, &y)?;
        before.push(y.clone());
    }
    before.reverse();
    let mut states = before;
    states.push(init.to_vec());
    let mut y = init.to_vec();
    for _ in 0..fwd {
        y = rk4_step(&rhs, &y, h);
        check_state(rw, &y)?;
        states.push(y.clone());
    }
    Ok(GeodesicTrajectory { h, s0: -(back as f64) * h, dim, states })
}

/// Observed order of the integrator from the end states at steps `h`, `h/2`, `h/4`.
pub fn convergence_order(rw: &RWSpacetime, init: &[f64], h: f64, n: usize) -> Result<f64> {
    let end = |k: usize| -> Result<Vec<f64>> {
        let tr = geodesic_integrate(rw, init, h / k as f64, n * k)?;
        Ok(tr.states.last().cloned().unwrap_or_default())
    };
    let (y1, y2, y4) = (end(1)?, end(2)?, end(4)?);
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok((dist(&y1, &y2) / dist(&y2, &y4)).log2())
}

/// A vector field paired against the observer field `U` by the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameVector {
    /// `∂_t`.
    Time,
    /// The lift of `∂_{x_k}`.
    Spatial(usize),
    /// `U` itself.
    Field,
}

/// `p ↦ g(p)(E(p), U(p))`.
pub fn frame_pairing(rw: &RWSpacetime, field: &VectorFieldModel, e: FrameVector) -> FnExpr {
    let (rw, u) = (rw.clone(), field.clone());
    FnExpr::custom(format!("⟨{e:?},{}⟩", field.name), move |p| {
        let up = u.eval(p);
        let ev = match e {
            FrameVector::Time => {
                let mut v = vec![0.0; p.len()];
                v[0] = 1.0;
                v
            }
            FrameVector::Spatial(k) => {
                let mut v = vec![0.0; p.len()];
                if 1 + k < p.len() {
                    v[1 + k] = 1.0;
                }
                v
            }
            FrameVector::Field => up.clone(),
        };
        c(rw.pairing(p, &ev, &up), 0.0)
    })
}

/// `u(t) = χ(⟨E, U⟩ ∘ ϑ^U(t)↾Z)` for `t` certified in `mor(Y, Z)`.
pub fn u_k_eval(o: &VfObject, rw: &RWSpacetime, e: FrameVector, y: &str, z: &str, chi: &Functional, t: f64) -> Result<f64> {
    let find = |l: &str| o.regions.iter().find(|r| r.label == l).ok_or_else(|| Error::Config(format!("no region {l} in {}", o.label)));
    let (ry, rz) = (find(y)?, find(z)?);
    if !certify(ry, rz, &o.field, t) {
        return Err(Error::Precondition(format!("t = {t} is not certified in mor({y}, {z})")));
    }
    let base = frame_pairing(rw, &o.field, e);
    let pulled = FnExpr::Pullback(Arc::new(base), o.field.flow_map(t)?);
    Ok(chi.apply(&AlgebraElement::func(pulled))?.re)
}

/// Shape of the block-orbit quantum model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyConfig {
    /// Number of orbit points `o_0 … o_{n−1}`.
    pub orbit_len: usize,
    /// Grid step `Δ` of the quantum dynamics.
    pub delta: f64,
    /// `T₁ᵐ` sends quantum time `kΔ` to classical time `λkΔ`.
    pub lambda: usize,
    /// Size of the matrix block carried by each orbit point.
    pub block: usize,
    /// Strength of the internal Hamiltonian.
    pub omega: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig { orbit_len: 17, delta: 0.02, lambda: 1, block: 2, omega: 0.7 }
    }
}

/// Positions inside `ix` of `i + shift` for every `i ∈ iy`.
fn index_map(iy: &[usize], ix: &[usize], shift: i64) -> Option<Vec<usize>> {
    iy.iter()
        .map(|&i| {
            let j = i as i64 + shift;
            if j < 0 {
                return None;
            }
            ix.iter().position(|&q| q as i64 == j)
        })
        .collect()
}

/// Quantum model over one flow context: region `Y` carries
/// `⊕_{i ∈ I_Y} Mat(m)` over the orbit points `o_i ∈ Y`, and `kΔ` acts by
/// moving block `i + λk` to block `i` and conjugating by `e^{−ikΔH}`.
#[derive(Clone)]
pub struct QuantumToy {
    pub context: String,
    pub cfg: ToyConfig,
    pub orbit: Vec<Point>,
    index: Arc<BTreeMap<String, Vec<usize>>>,
    hamiltonian: CMat,
    pattern: DynamicalPattern,
}

impl fmt::Debug for QuantumToy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuantumToy({}, {} orbit points)", self.context, self.orbit.len())
    }
}

fn unitary(h: &CMat, s: f64) -> CMat {
    h.map(|z| z * c(0.0, -s)).exp()
}

impl QuantumToy {
    pub fn new(ctx: &FlowContexts, context: &str, seed: Point, cfg: ToyConfig) -> Result<Self> {
        let o = ctx.object(context).ok_or_else(|| Error::Config(format!("unknown context {context}")))?;
        if cfg.orbit_len == 0 || !(cfg.delta > 0.0) || cfg.lambda == 0 || cfg.block == 0 {
            return Err(Error::Config(format!("degenerate quantum toy configuration {cfg:?}")));
        }
        if seed.len() != o.dim() {
            return Err(Error::Config(format!("seed has dimension {}, context {} has {}", seed.len(), context, o.dim())));
        }
        let mut orbit = vec![seed];
        for i in 1..cfg.orbit_len {
            let next = o.field.flow(cfg.delta, &orbit[i - 1])?;
            orbit.push(next);
        }
        let mut index = BTreeMap::new();
        let mut algs = HashMap::new();
        for r in &o.regions {
            let id = o.region_id(r);
            let is: Vec<usize> = (0..orbit.len()).filter(|&i| r.contains_closed(&orbit[i])).collect();
            if is.is_empty() {
                return Err(Error::Precondition(format!("orbit/region mismatch: region {id} holds no orbit point")));
            }
            algs.insert(id.clone(), StarAlgebra::block_algebra(format!("B[{id}]"), cfg.block * is.len(), cfg.block, 1e-9)?);
            index.insert(id, is);
        }
        let m = cfg.block;
        let mut hamiltonian = CMat::zeros(m, m);
        for j in 0..m {
            hamiltonian[(j, j)] = c(cfg.omega * j as f64 * 0.5, 0.0);
            if j + 1 < m {
                hamiltonian[(j, j + 1)] = c(cfg.omega, 0.0);
                hamiltonian[(j + 1, j)] = c(cfg.omega, 0.0);
            }
        }
        let index = Arc::new(index);
        let ga = ctx.pattern(context).g().clone();
        let lam = cfg.lambda as i64;
        let kmax = (cfg.orbit_len as i64 - 1) / lam;
        let handles: Vec<ObjHandle> = o.regions.iter().map(|r| o.handle(r)).collect();
        let mut table: HashMap<(String, String), Vec<i64>> = HashMap::new();
        for hx in &handles {
            for hy in &handles {
                let times: Vec<f64> = ga.hom(hx, hy).iter().map(region_handle_time).collect();
                let ks = (-kmax..=kmax)
                    .filter(|&k| {
                        let tc = (lam * k) as f64 * cfg.delta;
                        times.iter().any(|t| (t - tc).abs() <= 1e-12 * (1.0 + tc.abs())) && index_map(&index[&hy.id], &index[&hx.id], lam * k).is_some()
                    })
                    .collect();
                table.insert((hx.id.clone(), hy.id.clone()), ks);
            }
        }
        let delta = cfg.delta;
        let k_of = move |m: &MorHandle| (region_handle_time(m) / delta).round() as i64;
        let g = LazyCategory::builder(format!("Gq[{context}]"))
            .objects(handles)
            .hom(move |x: &ObjHandle, y: &ObjHandle| match table.get(&(x.id.clone(), y.id.clone())) {
                Some(ks) => ks.iter().map(|k| MorHandle::new(x.clone(), y.clone(), Payload::Real(*k as f64 * delta))).collect(),
                None => Vec::new(),
            })
            .compose(move |g: &MorHandle, h: &MorHandle| MorHandle::new(h.dom.clone(), g.cod.clone(), Payload::Real((k_of(g) + k_of(h)) as f64 * delta)))
            .identity(|x: &ObjHandle| MorHandle::new(x.clone(), x.clone(), Payload::Real(0.0)))
            .distance(|a: &MorHandle, b: &MorHandle| a.distance(b))
            .tol(1e-12)
            .build();
        let algs = Arc::new(algs);
        let (a1, a2, i2, h2) = (algs.clone(), algs, index.clone(), hamiltonian.clone());
        let pattern = DynamicalPattern::new(
            format!("Q[{context}]"),
            g,
            move |x| a1[&x.id].clone(),
            move |g: &MorHandle| {
                let s = region_handle_time(g);
                let k = (s / delta).round() as i64;
                let map = index_map(&i2[&g.cod.id], &i2[&g.dom.id], lam * k).expect("hom-sets only hold index-compatible shifts");
                PositiveMap::block_shift(format!("τq({s})"), &a2[&g.dom.id], &a2[&g.cod.id], map, unitary(&h2, s)).expect("block shapes agree")
            },
        );
        Ok(QuantumToy { context: context.to_string(), cfg, orbit, index, hamiltonian, pattern })
    }

    pub fn pattern(&self) -> &DynamicalPattern {
        &self.pattern
    }

    /// Orbit indices lying in the region with handle id `id`.
    pub fn indices(&self, id: &str) -> Option<&[usize]> {
        self.index.get(id).map(|v| v.as_slice())
    }

    pub fn points(&self, id: &str) -> Vec<Point> {
        self.indices(id).map(|is| is.iter().map(|&i| self.orbit[i].clone()).collect()).unwrap_or_default()
    }

    pub fn unitary(&self, s: f64) -> CMat {
        unitary(&self.hamiltonian, s)
    }

    /// `T₁ᵐ` on times: `kΔ ↦ λkΔ`, on the classical lattice.
    pub fn classical_time(&self, s: f64) -> f64 {
        let k = (s / self.cfg.delta).round() as i64;
        (self.cfg.lambda as i64 * k) as f64 * self.cfg.delta
    }

    /// `D_Y: f ↦ ⊕ᵢ f(oᵢ)·1`, from the classical algebra of `T₁ᵒY`.
    pub fn embedding(&self, classical: &StarAlgebra, y: &ObjHandle) -> Result<PositiveMap> {
        PositiveMap::evaluate(format!("D[{}]", y.id), classical, &self.pattern.algebra(y), self.points(&y.id))
    }

    /// Every `τ_b(g)` a unital *-hom, every `D_Y` unital, and
    /// `ψ(τ_b(g) D_X(A)) = Σᵢ wᵢ A(ϑ(λkΔ) oᵢ)` for block-scalar densities.
    pub fn check(&self, ctx: &FlowContexts, tol: f64) -> LawReport {
        let mut r = LawReport::new(format!("quantum toy {}", self.context));
        let Some(o) = ctx.object(&self.context) else {
            r.record_bool(false, || (vec![self.context.clone()], vec![], "context".into(), "registered".into()));
            return r;
        };
        let pa = ctx.pattern(&self.context);
        for g in &self.pattern.g().sampler().morphisms {
            let tau = self.pattern.dynamics(g);
            r.record_bool(tau.flags().star_hom, || (vec![g.dom.id.clone(), g.cod.id.clone()], vec![g.label()], "τ_b flags".into(), "*-hom".into()));
            let (ax, ay) = (self.pattern.algebra(&g.dom), self.pattern.algebra(&g.cod));
            let d = tau.apply(&ax.unit()).map(|u| ay.distance(&u, &ay.unit())).unwrap_or(f64::INFINITY);
            r.record(d, tol, || (vec![g.dom.id.clone(), g.cod.id.clone()], vec![g.label()], "τ_b(g)1".into(), "1".into()));
            let Ok(dx) = self.embedding(&pa.algebra(&g.dom), &g.dom) else {
                r.record_bool(false, || (vec![g.dom.id.clone()], vec![], "D_X".into(), "defined".into()));
                continue;
            };
            let iy = self.indices(&g.cod.id).unwrap_or(&[]);
            let total: f64 = (1..=iy.len()).map(|i| i as f64).sum();
            let weights: Vec<f64> = (1..=iy.len()).map(|i| i as f64 / total).collect();
            let m = self.cfg.block;
            let diag: Vec<_> = weights.iter().flat_map(|w| std::iter::repeat(c(w / m as f64, 0.0)).take(m)).collect();
            let rho = Functional::Mat(CMat::from_diagonal(&DVector::from_vec(diag)));
            let t = self.classical_time(region_handle_time(g));
            let mut obs = pa.algebra(&g.dom).sample_observables();
            obs.truncate(4);
            for a in &obs {
                let lhs = dx.apply(a).and_then(|x| tau.apply(&x)).and_then(|x| rho.apply(&x)).map(|v| v.re).unwrap_or(f64::NAN);
                let mut rhs = 0.0;
                for (w, &i) in weights.iter().zip(iy) {
                    rhs += w * o.field.flow(t, &self.orbit[i]).and_then(|q| a.eval(&q)).map(|v| v.re).unwrap_or(f64::NAN);
                }
                r.record(lhs - rhs, tol, || (vec![g.dom.id.clone(), g.cod.id.clone()], vec![g.label()], format!("ψ(τ_b D A) = {lhs}"), format!("Σ wᵢ A(ϑ oᵢ) = {rhs}")));
            }
        }
        for x in self.pattern.g().objects() {
            match self.embedding(&pa.algebra(x), x) {
                Ok(d) => {
                    let (ac, aq) = (pa.algebra(x), self.pattern.algebra(x));
                    let u = d.apply(&ac.unit()).map(|u| aq.distance(&u, &aq.unit())).unwrap_or(f64::INFINITY);
                    r.record(u, tol, || (vec![x.id.clone()], vec![], "D(1)".into(), "1".into()));
                    r.record_bool(d.flags().star_hom, || (vec![x.id.clone()], vec![], "D flags".into(), "*-hom".into()));
                }
                Err(e) => r.record_bool(false, || (vec![x.id.clone()], vec![], e.to_string(), "D_Y".into())),
            }
        }
        r
    }
}

fn toy_map(toys: Vec<QuantumToy>, a: &Species) -> Result<Arc<BTreeMap<String, QuantumToy>>> {
    let map: BTreeMap<String, QuantumToy> = toys.into_iter().map(|t| (t.context.clone(), t)).collect();
    for m in a.ctx().objects() {
        if !map.contains_key(&m.id) {
            return Err(Error::Config(format!("no quantum toy for context {}", m.id)));
        }
    }
    Ok(Arc::new(map))
}

/// `b(φ)` for a context morphism `φ: M → N`: blocks of `N` are relabelled
/// onto the blocks of `M` carrying the same orbit index.
fn toy_dp_morphism(ctx: &FlowContexts, toys: &BTreeMap<String, QuantumToy>, m: &MorHandle) -> Result<DpMorphism> {
    let phi = payload_affine(&m.payload).ok_or_else(|| Error::Precondition("context morphism without affine payload".into()))?;
    let src = ctx.object(&m.dom.id).ok_or_else(|| Error::Config(format!("unknown context {}", m.dom.id)))?;
    let dst = ctx.object(&m.cod.id).ok_or_else(|| Error::Config(format!("unknown context {}", m.cod.id)))?;
    let vm = VfMorphism::new(format!("φ[{}→{}]", src.label, dst.label), src, dst, phi.clone())?;
    let (tm, tn) = (&toys[&src.label], &toys[&dst.label]);
    for (i, p) in tn.orbit.iter().enumerate() {
        let q = phi.apply(p);
        let d = q.iter().zip(&tm.orbit[i]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if d > 1e-9 {
            return Err(Error::Precondition(format!("orbit mismatch: φ(o_{i}) of {} misses o_{i} of {} by {d:e}", dst.label, src.label)));
        }
    }
    let mut maps = HashMap::new();
    for y in &dst.regions {
        let yid = dst.region_id(y);
        let img = &vm.region_images[&yid];
        let map = index_map(tn.indices(&yid).unwrap_or(&[]), tm.indices(img).unwrap_or(&[]), 0)
            .ok_or_else(|| Error::Precondition(format!("orbit points of {yid} are missing from {img}")))?;
        maps.insert(yid, map);
    }
    let handles: Arc<HashMap<String, ObjHandle>> = Arc::new(src.regions.iter().map(|r| (src.region_id(r), src.handle(r))).collect());
    let images = Arc::new(vm.region_images.clone());
    let (i1, h1, i2, h2) = (images.clone(), handles.clone(), images, handles);
    let desc = phi.describe();
    let f = FunctorMap::new(
        format!("b₁[{desc}]"),
        tn.pattern.g().clone(),
        tm.pattern.g().clone(),
        move |y: &ObjHandle| h1[&i1[&y.id]].clone(),
        move |g: &MorHandle| MorHandle::new(h2[&i2[&g.dom.id]].clone(), h2[&i2[&g.cod.id]].clone(), g.payload.clone()),
    );
    let (pm, pn, f2) = (tm.pattern.clone(), tn.pattern.clone(), f.clone());
    let eye = CMat::identity(tm.cfg.block, tm.cfg.block);
    let maps = Arc::new(maps);
    DpMorphism::new(format!("b₃[{desc}]"), &tm.pattern, &tn.pattern, f, move |y| {
        PositiveMap::block_shift(format!("relabel[{desc}]"), &pm.algebra(&f2.obj(y)), &pn.algebra(y), maps[&y.id].clone(), eye.clone()).expect("block shapes agree")
    })
}

/// The quantum species `𝔟` over the context category of `a`.
pub fn toy_species(ctx: &FlowContexts, a: &Species, toys: Vec<QuantumToy>, tol: f64) -> Result<Species> {
    let toys = toy_map(toys, a)?;
    for m in &a.ctx().sampler().morphisms {
        toy_dp_morphism(ctx, &toys, m)?;
    }
    let (t1, t2, c2) = (toys.clone(), toys, ctx.clone());
    let map = FunctorMap::new(
        "𝔟",
        a.ctx().clone(),
        chdv_category("Chdv", Vec::new(), Vec::new(), tol, SamplerConfig::default()),
        move |x: &ObjHandle| t1[&x.id].pattern.clone(),
        move |m: &MorHandle| psi(&toy_dp_morphism(&c2, &t2, m).expect("context morphisms validated at construction")),
    );
    Ok(Species::new("𝔟", map))
}

fn toy_component(a: &Species, toy: &QuantumToy, m: &ObjHandle) -> Result<DpMorphism> {
    let pa = a.pattern(m);
    let t = toy.clone();
    let f = FunctorMap::new(
        format!("T₁[{}]", m.id),
        toy.pattern.g().clone(),
        pa.g().clone(),
        |y: &ObjHandle| y.clone(),
        move |g: &MorHandle| MorHandle::new(g.dom.clone(), g.cod.clone(), Payload::Real(t.classical_time(region_handle_time(g)))),
    );
    for y in toy.pattern.g().objects() {
        toy.embedding(&pa.algebra(y), y)?;
    }
    let (t2, pa2) = (toy.clone(), pa.clone());
    DpMorphism::new(format!("T[{}]", m.id), &pa, &toy.pattern, f, move |y| t2.embedding(&pa2.algebra(y), y).expect("embeddings validated at construction"))
}

/// The classical→quantum connector `T: 𝔞 → 𝔟` with `T₃(M)(Y) = D_Y` and
/// `T₂ = T₃†`.
pub fn build_toy_connector(ctx: &FlowContexts, a: &Species, toys: Vec<QuantumToy>, tol: f64) -> Result<Connector> {
    let b = toy_species(ctx, a, toys.clone(), tol)?;
    let toys = toy_map(toys, a)?;
    for m in a.ctx().objects() {
        toy_component(a, &toys[&m.id], m)?;
    }
    let a2 = a.clone();
    Connector::new("T[toy]", a, &b, move |m| psi(&toy_component(&a2, &toys[&m.id], m).expect("components validated at construction")))
}

/// Inputs of the Hubble factors for one context `O` and regions `Y`, `Z`.
#[derive(Clone)]
pub struct HubbleSetup {
    pub rw: RWSpacetime,
    pub connector: Connector,
    pub field: VectorFieldModel,
    pub context: ObjHandle,
    pub y: ObjHandle,
    pub z: ObjHandle,
    pub k: usize,
    pub psi: Functional,
    pub delta: f64,
    pub trajectory: GeodesicTrajectory,
}

/// Quantum morphisms `Y → Z` of `b(O)`, sorted by time.
fn quantum_times(setup: &HubbleSetup) -> Vec<MorHandle> {
    let pb = setup.connector.dst.pattern(&setup.context);
    let mut gs = pb.g().hom(&setup.y, &setup.z);
    gs.sort_by(|a, b| region_handle_time(a).total_cmp(&region_handle_time(b)));
    gs
}

/// `𝔮_k(s) = ψ(τ_b(s) V_k) / ψ(1)` with `V_k = T₃(O)(Y)⟨Ē_k, V⟩`.
pub fn quantum_factor(setup: &HubbleSetup) -> Result<Vec<(f64, f64)>> {
    let strength = setup.psi.strength();
    if !(strength > 0.0) {
        return Err(Error::ZeroStrength);
    }
    let pb = setup.connector.dst.pattern(&setup.context);
    let to = setup.connector.at(&setup.context);
    let pairing = AlgebraElement::func(frame_pairing(&setup.rw, &setup.field, FrameVector::Spatial(setup.k)));
    let vk = to.device(&setup.y).apply(&pairing)?;
    quantum_times(setup)
        .iter()
        .map(|g| Ok((region_handle_time(g), setup.psi.apply(&pb.dynamics(g).apply(&vk)?)?.re / strength)))
        .collect()
}

/// `(s, t₀(s), 𝔠_k(s))` with `𝔠_k = e_k∘T₁ᵐ(O)` and `t₀ = t∘T₁ᵐ(O)`.
pub fn classical_factor(setup: &HubbleSetup) -> Result<Vec<(f64, f64, f64)>> {
    let to = setup.connector.at(&setup.context);
    quantum_times(setup)
        .iter()
        .map(|g| {
            let sbar = region_handle_time(&to.f.mor(g));
            let i = setup
                .trajectory
                .index_at(sbar)
                .ok_or_else(|| Error::Precondition(format!("trajectory does not sample s̄ = {sbar}")))?;
            Ok((region_handle_time(g), setup.trajectory.t(i), setup.trajectory.e_k(&setup.rw, setup.k, i)?))
        })
        .collect()
}

/// `Δ² − 4c′q t₀′` and the roots `c_k^±`, absent when complex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintInterval {
    pub discriminant: f64,
    pub c_minus: Option<f64>,
    pub c_plus: Option<f64>,
}

pub fn constraint_interval(q: f64, dq: f64, dc: f64, dt0: f64) -> ConstraintInterval {
    let disc = dq * dq - 4.0 * dc * q * dt0;
    if disc < 0.0 {
        return ConstraintInterval { discriminant: disc, c_minus: None, c_plus: None };
    }
    let r = disc.sqrt();
    ConstraintInterval { discriminant: disc, c_minus: Some((dq - r) / (2.0 * dt0)), c_plus: Some((dq + r) / (2.0 * dt0)) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    NonPositive,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Positive => "positive",
            Verdict::NonPositive => "non-positive",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// Sign of `f″(t₀(s))` read off `c_k(s)`: positive on the complex branch,
/// otherwise by membership in `]−∞, c⁻[ ∪ ]c⁺, ∞[`. Values within
/// `1e−5·(|q| + |c|)` of a root are indeterminate.
pub fn positivity_verdict(c: f64, q: f64, dt0: f64, iv: &ConstraintInterval) -> Verdict {
    let (Some(cm), Some(cp)) = (iv.c_minus, iv.c_plus) else {
        return Verdict::Positive;
    };
    if !(dt0 > 0.0) {
        return Verdict::Indeterminate;
    }
    let band = 1e-5 * (q.abs() + c.abs());
    if (c - cm).abs() <= band || (c - cp).abs() <= band {
        Verdict::Indeterminate
    } else if c < cm || c > cp {
        Verdict::Positive
    } else {
        Verdict::NonPositive
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HubbleRow {
    pub s: f64,
    pub t0: f64,
    pub q: f64,
    pub c: f64,
    pub dq: f64,
    pub dc: f64,
    pub dt0: f64,
    /// `H(t₀(s))` from the scale function.
    pub h_lhs: f64,
    /// `c_k(s) / q_k(s)`.
    pub h_rhs: f64,
    pub accel_formula: f64,
    pub accel_analytic: f64,
    pub f2: f64,
    pub interval: ConstraintInterval,
    pub verdict: Verdict,
}

/// Interior rows of the factor series on `s = kΔ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HubbleSeries {
    pub scale: String,
    pub k: usize,
    pub rows: Vec<HubbleRow>,
    /// Largest `|q_k|` over the whole grid, interior or not.
    pub q_max: f64,
}

impl HubbleSeries {
    pub const CSV_HEADER: &'static str = "s,t0,q_k,c_k,H_lhs,H_rhs,accel_formula,accel_analytic,verdict";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
                r.s,
                r.t0,
                r.q,
                r.c,
                r.h_lhs,
                r.h_rhs,
                r.accel_formula,
                r.accel_analytic,
                r.verdict.as_str()
            ));
        }
        out
    }
}

/// `(f″/f)∘t₀ = q⁻²(c² − (c q′ − c′ q)(dt₀/ds)⁻¹)`.
pub fn acceleration_from_factors(q: f64, c: f64, dq: f64, dc: f64, dt0: f64) -> f64 {
    (c * c - (c * dq - dc * q) / dt0) / (q * q)
}

/// Build the interior series from sampled factors on `s = kΔ`; derivatives
/// by five-point central differences, so two grid points are dropped at
/// each end of every run of consecutive `k`.
pub fn series_from_factors(scale: &ScaleFunction, k: usize, delta: f64, s: &[f64], q: &[f64], c: &[f64], t0: &[f64]) -> HubbleSeries {
    let ks: Vec<i64> = s.iter().map(|x| (x / delta).round() as i64).collect();
    let q_max = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut rows = Vec::new();
    for i in 2..s.len().saturating_sub(2) {
        if (0..5).any(|j| ks[i - 2 + j] != ks[i] - 2 + j as i64) {
            continue;
        }
        let (dq, dc, dt0) = (d1_5(q, i, delta), d1_5(c, i, delta), d1_5(t0, i, delta));
        let interval = constraint_interval(q[i], dq, dc, dt0);
        rows.push(HubbleRow {
            s: s[i],
            t0: t0[i],
            q: q[i],
            c: c[i],
            dq,
            dc,
            dt0,
            h_lhs: scale.hubble(t0[i]),
            h_rhs: c[i] / q[i],
            accel_formula: acceleration_from_factors(q[i], c[i], dq, dc, dt0),
            accel_analytic: scale.accel_ratio(t0[i]),
            f2: scale.ddf(t0[i]),
            interval,
            verdict: positivity_verdict(c[i], q[i], dt0, &interval),
        });
    }
    HubbleSeries { scale: scale.describe(), k, rows, q_max }
}

/// Both factors sampled on the quantum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSamples {
    pub k: usize,
    pub delta: f64,
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub t0: Vec<f64>,
}

impl FactorSamples {
    /// Series against the analytic side of `scale`.
    pub fn series(&self, scale: &ScaleFunction) -> HubbleSeries {
        series_from_factors(scale, self.k, self.delta, &self.s, &self.q, &self.c, &self.t0)
    }
}

pub fn hubble_factors(setup: &HubbleSetup) -> Result<FactorSamples> {
    let qs = quantum_factor(setup)?;
    let cs = classical_factor(setup)?;
    Ok(FactorSamples {
        k: setup.k,
        delta: setup.delta,
        s: qs.iter().map(|x| x.0).collect(),
        q: qs.iter().map(|x| x.1).collect(),
        c: cs.iter().map(|x| x.2).collect(),
        t0: cs.iter().map(|x| x.1).collect(),
    })
}

pub fn hubble_series(setup: &HubbleSetup) -> Result<HubbleSeries> {
    Ok(hubble_factors(setup)?.series(&setup.rw.scale))
}

const Q_GUARD: f64 = 1e-12;

fn degenerate(series: &HubbleSeries) -> Option<String> {
    if series.rows.is_empty() {
        return Some("no interior grid points".into());
    }
    series.rows.iter().any(|r| r.q.abs() < Q_GUARD).then(|| "q_k vanishes on the grid (comoving geodesic)".to_string())
}

/// `H∘t₀ = c_k/q_k`, relative error per interior grid point.
pub fn hubble_factorization_check(series: &HubbleSeries, tol: f64) -> LawReport {
    let law = format!("hubble factorization for {}", series.scale);
    if let Some(why) = degenerate(series) {
        return LawReport::not_applicable(law, why);
    }
    let mut r = LawReport::new(law);
    for row in &series.rows {
        let d = (row.h_lhs - row.h_rhs) / row.h_lhs.abs().max(1e-300);
        r.record(d, tol, || (vec![format!("s={}", row.s)], vec![], format!("H(t₀) = {}", row.h_lhs), format!("c/q = {}", row.h_rhs)));
    }
    r
}

/// The acceleration formula against the analytic `f″/f`, relative to
/// `max(|f″/f|, 1e−8)`.
pub fn acceleration_check(series: &HubbleSeries, tol: f64) -> LawReport {
    let law = format!("acceleration formula for {}", series.scale);
    if let Some(why) = degenerate(series) {
        return LawReport::not_applicable(law, why);
    }
    let mut r = LawReport::new(law);
    for row in &series.rows {
        let d = (row.accel_formula - row.accel_analytic) / row.accel_analytic.abs().max(1e-8);
        r.record(d, tol, || (vec![format!("s={}", row.s)], vec![], format!("formula {}", row.accel_formula), format!("f″/f = {}", row.accel_analytic)));
    }
    r
}

/// Verdicts against the sign of the analytic `f″(t₀)`. An indeterminate
/// verdict is accepted only where `|f″| ≤ 1e−6·f`.
pub fn positivity_check(series: &HubbleSeries, scale: &ScaleFunction) -> LawReport {
    let law = format!("positivity verdict for {}", series.scale);
    if let Some(why) = degenerate(series) {
        return LawReport::not_applicable(law, why);
    }
    let mut r = LawReport::new(law);
    for row in &series.rows {
        let flat = row.f2.abs() <= 1e-6 * scale.f(row.t0);
        let ok = match row.verdict {
            Verdict::Positive => row.f2 > 0.0 && !flat,
            Verdict::NonPositive => row.f2 <= 0.0 || flat,
            Verdict::Indeterminate => flat,
        };
        r.record_bool(ok, || (vec![format!("s={}", row.s)], vec![], format!("verdict {}", row.verdict.as_str()), format!("f″(t₀) = {}", row.f2)));
    }
    r
}

/// Counts of interior rows on the complex branch, the real branch, and
/// indeterminate.
pub fn branch_counts(series: &HubbleSeries) -> (usize, usize, usize) {
    let complex = series.rows.iter().filter(|r| r.interval.c_minus.is_none()).count();
    let indeterminate = series.rows.iter().filter(|r| r.verdict == Verdict::Indeterminate).count();
    (complex, series.rows.len() - complex, indeterminate)
}

/// Images under `φ` of sampled geodesics still solve the geodesic equations.
pub fn geodesic_relatedness_check(rw: &RWSpacetime, phi: &PointMap, curves: &[GeodesicTrajectory], tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("geodesic relatedness under {}", phi.describe()));
    for (ci, tr) in curves.iter().enumerate() {
        let mapped: Vec<Vec<f64>> = (0..tr.len()).map(|i| phi.apply(tr.position(i))).collect();
        for i in 2..tr.len().saturating_sub(2) {
            let res = geodesic_residual(rw, &mapped, tr.h, i).unwrap_or(f64::INFINITY);
            r.record(res, tol, || (vec![format!("curve {ci}"), format!("s={}", tr.s(i))], vec![phi.describe()], "φ∘α".into(), "geodesic".into()));
        }
    }
    r
}

/// Parameters of the two-context Robertson–Walker fixture.
#[derive(Debug, Clone)]
pub struct RwToyConfig {
    pub scale: ScaleFunction,
    pub interval: (f64, f64),
    pub spatial_dim: usize,
    /// `α(0) = (t, x)`.
    pub seed: Point,
    /// Comoving momentum `f² x′`.
    pub momentum: Vec<f64>,
    /// `−g(α′, α′)`: 1 for timelike, 0 for null.
    pub mu: f64,
    /// RK4 step of the field and of the geodesic integration.
    pub h: f64,
    pub toy: ToyConfig,
    /// Spatial translation to a second context; empty for a single context.
    pub shift: Vec<f64>,
    pub grid_n: usize,
}

impl RwToyConfig {
    pub fn new(scale: ScaleFunction, interval: (f64, f64)) -> Self {
        RwToyConfig {
            scale,
            interval,
            spatial_dim: 1,
            seed: vec![1.0, 0.0],
            momentum: vec![0.6],
            mu: 1.0,
            h: 0.005,
            toy: ToyConfig { orbit_len: 33, delta: 0.02, ..ToyConfig::default() },
            shift: vec![0.3],
            grid_n: 3,
        }
    }
}

/// Robertson–Walker contexts `M` (and `N = M` translated back by `shift`)
/// carrying the geodesic field, regions `Z ∋ α(0)`, `Y ⊇ orbit`, `W` the
/// later half of `Y`, the flow species, the toy connector and the geodesic.
#[derive(Clone)]
pub struct RwFixture {
    pub cfg: RwToyConfig,
    pub rw: RWSpacetime,
    pub field: VectorFieldModel,
    pub contexts: FlowContexts,
    pub classical: Species,
    pub connector: Connector,
    pub toys: Vec<QuantumToy>,
    pub trajectory: GeodesicTrajectory,
}

fn shifted(p: &[f64], shift: &[f64], sign: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    for (i, s) in shift.iter().enumerate() {
        q[1 + i] += sign * s;
    }
    q
}

impl RwFixture {
    pub fn build(cfg: RwToyConfig, sampler: SamplerConfig, tol: f64) -> Result<Self> {
        let rw = RWSpacetime::new(cfg.interval, cfg.spatial_dim, 0, cfg.scale.clone())?;
        let dim = rw.dim();
        if cfg.seed.len() != dim {
            return Err(Error::Config(format!("seed has dimension {}, spacetime has {dim}", cfg.seed.len())));
        }
        if !cfg.shift.is_empty() && cfg.shift.len() != cfg.spatial_dim {
            return Err(Error::Config("shift must have one entry per spatial dimension".into()));
        }
        let ratio = cfg.toy.delta / cfg.h;
        if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Config(format!("Δ = {} is not a multiple of h = {}", cfg.toy.delta, cfg.h)));
        }
        let field = rw.momentum_field(&cfg.momentum, cfg.mu, cfg.h)?;
        let n = cfg.toy.orbit_len;
        let mut orbit = vec![cfg.seed.clone()];
        for i in 1..n.max(2) {
            let next = field.flow(cfg.toy.delta, &orbit[i - 1])?;
            if !rw.contains_time(next[0]) {
                return Err(Error::LeftInterval(next[0]));
            }
            orbit.push(next);
        }
        let lo: Vec<f64> = (0..dim).map(|k| orbit.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..dim).map(|k| orbit.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let step = (0..dim).map(|k| (orbit[1][k] - orbit[0][k]).abs()).fold(0.0, f64::max);
        let w = 0.25 * step;
        let extent = (0..dim).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        let pad = 0.25 * extent + 2.0 * w;
        let t_lo = (lo[0] - pad).max(rw.t_min + 0.5 * (lo[0] - rw.t_min));
        let t_hi = (hi[0] + pad).min(rw.t_max - 0.5 * (rw.t_max - hi[0]));
        let mut ylo: Vec<f64> = lo.iter().map(|x| x - pad).collect();
        let mut yhi: Vec<f64> = hi.iter().map(|x| x + pad).collect();
        ylo[0] = t_lo;
        yhi[0] = t_hi;
        let mut wlo = ylo.clone();
        wlo[0] = 0.5 * (lo[0] + hi[0]);
        let zlo: Vec<f64> = cfg.seed.iter().map(|x| x - w).collect();
        let zhi: Vec<f64> = cfg.seed.iter().map(|x| x + w).collect();
        let regions = |sign: f64| -> Result<Vec<Region>> {
            Ok(vec![
                Region::new("Y", shifted(&ylo, &cfg.shift, sign), shifted(&yhi, &cfg.shift, sign), cfg.grid_n, None)?,
                Region::new("Z", shifted(&zlo, &cfg.shift, sign), shifted(&zhi, &cfg.shift, sign), cfg.grid_n, None)?,
                Region::new("W", shifted(&wlo, &cfg.shift, sign), shifted(&yhi, &cfg.shift, sign), cfg.grid_n, None)?,
            ])
        };
        let grid = lattice_grid(cfg.toy.delta, n - 1);
        let m = VfObject::new("M", field.clone(), regions(0.0)?, grid.clone())?;
        let mut objects = vec![m.clone()];
        let mut morphisms = Vec::new();
        let mut seeds = vec![("M", cfg.seed.clone())];
        if !cfg.shift.is_empty() {
            let nctx = VfObject::new("N", field.clone(), regions(-1.0)?, grid)?;
            let mut fwd = vec![0.0; dim];
            fwd[1..].copy_from_slice(&cfg.shift);
            let back: Vec<f64> = fwd.iter().map(|x| -x).collect();
            morphisms.push(VfMorphism::new("φ", &m, &nctx, PointMap::translation(&fwd))?);
            morphisms.push(VfMorphism::new("φ⁻¹", &nctx, &m, PointMap::translation(&back))?);
            seeds.push(("N", shifted(&cfg.seed, &cfg.shift, -1.0)));
            objects.push(nctx);
        }
        let contexts = FlowContexts::new(objects, morphisms)?;
        let classical = contexts.species(sampler, tol);
        let toys = seeds.into_iter().map(|(l, s)| QuantumToy::new(&contexts, l, s, cfg.toy)).collect::<Result<Vec<_>>>()?;
        let connector = build_toy_connector(&contexts, &classical, toys.clone(), tol)?;
        let mut init = cfg.seed.clone();
        init.extend(rw.momentum_velocity(&cfg.seed, &cfg.momentum, cfg.mu));
        let per = ratio.round() as usize;
        let trajectory = geodesic_integrate_window(&rw, &init, cfg.h, 4, cfg.toy.lambda * (n - 1) * per + 4)?;
        Ok(RwFixture { cfg, rw, field, contexts, classical, connector, toys, trajectory })
    }

    pub fn context(&self, label: &str) -> Option<ObjHandle> {
        self.contexts.object(label).map(|o| self.contexts.handle(o))
    }

    pub fn region(&self, context: &str, label: &str) -> Option<ObjHandle> {
        let o = self.contexts.object(context)?;
        o.regions.iter().find(|r| r.label == label).map(|r| o.handle(r))
    }

    /// Hubble inputs on `(Y, Z)` of `M` with `ψ = strength·1/m` on the block of `α(0)`.
    pub fn hubble_setup(&self, k: usize, strength: f64) -> Result<HubbleSetup> {
        let missing = || Error::Config("fixture lacks context M or its regions".into());
        let context = self.context("M").ok_or_else(missing)?;
        let y = self.region("M", "Y").ok_or_else(missing)?;
        let z = self.region("M", "Z").ok_or_else(missing)?;
        let d = self.connector.dst.pattern(&context).algebra(&z).mat_dim().map(|x| x.0).unwrap_or(0);
        let rho = CMat::identity(d, d).map(|x| x * c(strength / d as f64, 0.0));
        Ok(HubbleSetup {
            rw: self.rw.clone(),
            connector: self.connector.clone(),
            field: self.field.clone(),
            context,
            y,
            z,
            k,
            psi: Functional::density(rho)?,
            delta: self.cfg.toy.delta,
            trajectory: self.trajectory.clone(),
        })
    }

    pub fn series(&self, k: usize, strength: f64) -> Result<HubbleSeries> {
        hubble_series(&self.hubble_setup(k, strength)?)
    }

    pub fn factors(&self, k: usize, strength: f64) -> Result<FactorSamples> {
        hubble_factors(&self.hubble_setup(k, strength)?)
    }
}
