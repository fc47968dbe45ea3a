//! Complete vector fields on boxes of ℝⁿ, their flows, the dynamical
//! category of regions, and the classical flow species.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{BoxDomain, PointMap, PositiveMap, StarAlgebra};
use crate::category::{FunctorMap, LazyCategory, MorHandle, ObjHandle, Payload, SamplerConfig};
use crate::error::{Error, Result};
use crate::pattern::{chdv_category, psi, ChdvMorphism, DpMorphism, DynCat, DynamicalPattern};
use crate::report::LawReport;

type FieldFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Default equality tolerance of region algebras.
pub const FN_EQ_TOL: f64 = 1e-9;

#[derive(Clone)]
pub enum FieldKind {
    /// Constant field `v`.
    Translation(Vec<f64>),
    /// `p ↦ A p`, flowed by the matrix exponential.
    Linear(DMatrix<f64>),
    /// Arbitrary field flowed by fixed-step RK4.
    Numeric { f: FieldFn, h: f64, max_steps: usize },
}

/// A complete vector field on ℝⁿ.
#[derive(Clone)]
pub struct VectorFieldModel {
    pub name: String,
    pub dim: usize,
    pub kind: FieldKind,
}

impl fmt::Debug for VectorFieldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({}, dim {})", self.name, self.dim)
    }
}

pub(crate) fn rk4_step(f: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], h: f64) -> Vec<f64> {
    let n = p.len();
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { (0..n).map(|i| a[i] + s * b[i]).collect() };
    let k1 = f(p);
    let k2 = f(&add(p, &k1, h / 2.0));
    let k3 = f(&add(p, &k2, h / 2.0));
    let k4 = f(&add(p, &k3, h));
    (0..n).map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Step count and signed step for integrating over time `t`. Times that are
/// integer multiples of `h` use exactly `±h`, so flows along a common grid
/// reproduce each other bit for bit.
fn step_plan(t: f64, h: f64) -> (usize, f64) {
    if t == 0.0 {
        return (0, 0.0);
    }
    let ratio = t.abs() / h;
    let r = ratio.round();
    if (ratio - r).abs() <= 1e-9 * ratio.max(1.0) {
        (r as usize, h.copysign(t))
    } else {
        let n = ratio.ceil() as usize;
        (n, t / n as f64)
    }
}

impl VectorFieldModel {
    pub fn translation(name: impl Into<String>, v: Vec<f64>) -> Self {
        VectorFieldModel { name: name.into(), dim: v.len(), kind: FieldKind::Translation(v) }
    }

    pub fn linear(name: impl Into<String>, a: DMatrix<f64>) -> Self {
        VectorFieldModel { name: name.into(), dim: a.nrows(), kind: FieldKind::Linear(a) }
    }

    pub fn numeric(name: impl Into<String>, dim: usize, h: f64, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        VectorFieldModel { name: name.into(), dim, kind: FieldKind::Numeric { f: Arc::new(f), h, max_steps: 1_000_000 } }
    }

    /// The same field integrated numerically with step `h`.
    pub fn as_numeric(&self, h: f64) -> Self {
        let me = self.clone();
        VectorFieldModel::numeric(format!("{}~rk4", self.name), self.dim, h, move |p| me.eval(p))
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        match &self.kind {
            FieldKind::Translation(v) => v.clone(),
            FieldKind::Linear(a) => (a * DVector::from_column_slice(p)).iter().copied().collect(),
            FieldKind::Numeric { f, .. } => f(p),
        }
    }

    fn check_budget(&self, t: f64) -> Result<()> {
        if let FieldKind::Numeric { h, max_steps, .. } = &self.kind {
            if step_plan(t, *h).0 > *max_steps {
                return Err(Error::StepBudget(format!("{}: |t| = {} needs more than {} steps of {}", self.name, t.abs(), max_steps, h)));
            }
        }
        Ok(())
    }

    /// `ϑ(t)(p)`.
    pub fn flow(&self, t: f64, p: &[f64]) -> Result<Vec<f64>> {
        self.check_budget(t)?;
        Ok(match &self.kind {
            FieldKind::Translation(v) => p.iter().zip(v).map(|(x, v)| x + t * v).collect(),
            FieldKind::Linear(a) => ((a * t).exp() * DVector::from_column_slice(p)).iter().copied().collect(),
            FieldKind::Numeric { f, h, .. } => {
                let (n, step) = step_plan(t, *h);
                let mut q = p.to_vec();
                for _ in 0..n {
                    q = rk4_step(f.as_ref(), &q, step);
                }
                q
            }
        })
    }

    /// `ϑ(t)` as a point map: exact for closed-form kinds.
    pub fn flow_map(&self, t: f64) -> Result<PointMap> {
        self.check_budget(t)?;
        Ok(match &self.kind {
            FieldKind::Translation(v) => PointMap::translation(&v.iter().map(|x| x * t).collect::<Vec<_>>()),
            FieldKind::Linear(a) => PointMap::affine((a * t).exp(), DVector::zeros(self.dim)),
            FieldKind::Numeric { .. } => {
                let me = self.clone();
                PointMap::custom(format!("ϑ[{}]({t})", self.name), move |p| me.flow(t, p).expect("budget checked"))
            }
        })
    }

    /// Central-difference Jacobian of the field.
    pub fn jacobian(&self, p: &[f64], h: f64) -> DMatrix<f64> {
        let n = self.dim;
        let mut j = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut pp = p.to_vec();
            let mut pm = p.to_vec();
            pp[k] += h;
            pm[k] -= h;
            let (fp, fm) = (self.eval(&pp), self.eval(&pm));
            for i in 0..n {
                j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        j
    }
}

/// `[V,W] = J_W·V − J_V·W` by central differences with step `h`.
pub fn lie_bracket(v: &VectorFieldModel, w: &VectorFieldModel, h: f64) -> VectorFieldModel {
    let (v1, w1) = (v.clone(), w.clone());
    let name = format!("[{},{}]", v.name, w.name);
    VectorFieldModel::numeric(name, v.dim, h, move |p| {
        let (vp, wp) = (DVector::from_vec(v1.eval(p)), DVector::from_vec(w1.eval(p)));
        let out = w1.jacobian(p, h) * vp - v1.jacobian(p, h) * wp;
        out.iter().copied().collect()
    })
}

/// Group law `ϑ(s+t) = ϑ(s)∘ϑ(t)` on sampled times and points.
pub fn check_flow_group_law(v: &VectorFieldModel, times: &[f64], points: &[Vec<f64>], tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("flow group law of {}", v.name));
    for &s in times {
        for &t in times {
            for p in points {
                let lhs = v.flow(s + t, p);
                let rhs = v.flow(t, p).and_then(|q| v.flow(s, &q));
                let d = match (&lhs, &rhs) {
                    (Ok(a), Ok(b)) => max_abs_diff(a, b),
                    _ => f64::INFINITY,
                };
                r.record(d, tol, || (vec![format!("{p:?}")], vec![format!("s={s}"), format!("t={t}")], format!("{lhs:?}"), format!("{rhs:?}")));
            }
        }
    }
    r
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// An axis-aligned open box with probe lattices.
#[derive(Debug, Clone)]
pub struct Region {
    pub label: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub grid_n: usize,
    pub margin: f64,
    probes: Vec<Vec<f64>>,
    boundary: Vec<Vec<f64>>,
}

fn lattice(lo: &[f64], hi: &[f64], n: usize, closed: bool) -> Vec<Vec<f64>> {
    let dim = lo.len();
    let count = if closed { n + 1 } else { n };
    let coord = |k: usize, i: usize| {
        let s = if closed { i as f64 / n as f64 } else { (i as f64 + 1.0) / (n as f64 + 1.0) };
        lo[k] + s * (hi[k] - lo[k])
    };
    let mut out = vec![Vec::new()];
    for k in 0..dim {
        let mut next = Vec::with_capacity(out.len() * count);
        for p in &out {
            for i in 0..count {
                let mut q = p.clone();
                q.push(coord(k, i));
                next.push(q);
            }
        }
        out = next;
    }
    out
}

impl Region {
    /// `margin = None` picks `1e-6 ×` the box diameter.
    pub fn new(label: impl Into<String>, lo: Vec<f64>, hi: Vec<f64>, grid_n: usize, margin: Option<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) || grid_n == 0 {
            return Err(Error::Config(format!("invalid region box {lo:?}..{hi:?} with grid {grid_n}")));
        }
        let diam = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        let margin = margin.unwrap_or(1e-6 * diam);
        let probes = lattice(&lo, &hi, grid_n, false);
        let boundary: Vec<Vec<f64>> = lattice(&lo, &hi, grid_n.max(1), true)
            .into_iter()
            .filter(|p| p.iter().enumerate().any(|(k, x)| *x == lo[k] || *x == hi[k]))
            .collect();
        Ok(Region { label: label.into(), lo, hi, grid_n, margin, probes, boundary })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
    pub fn probes(&self) -> &[Vec<f64>] {
        &self.probes
    }
    pub fn boundary_probes(&self) -> &[Vec<f64>] {
        &self.boundary
    }
    pub fn domain(&self) -> BoxDomain {
        BoxDomain { lo: self.lo.clone(), hi: self.hi.clone() }
    }

    /// Inside the box shrunk by the margin.
    pub fn contains_strictly(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().enumerate().all(|(k, x)| *x >= self.lo[k] + self.margin && *x <= self.hi[k] - self.margin)
    }

    pub fn contains_closed(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().enumerate().all(|(k, x)| *x >= self.lo[k] && *x <= self.hi[k])
    }

    pub fn same_box(&self, lo: &[f64], hi: &[f64], tol: f64) -> bool {
        max_abs_diff(&self.lo, lo) <= tol && max_abs_diff(&self.hi, hi) <= tol
    }
}

/// `[0, h, -h, 2h, -2h, …, kh, -kh]` with exact multiples, so composites of
/// grid times land on the grid.
pub fn lattice_grid(h: f64, k: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    for i in 1..=k {
        out.push(i as f64 * h);
        out.push(-(i as f64) * h);
    }
    out
}

/// `{t ∈ grid : ϑ(t)Y ⊆ X}`, certified on the probes of `Y`.
pub fn mor_set(x: &Region, y: &Region, v: &VectorFieldModel, grid: &[f64]) -> Vec<f64> {
    grid.iter().copied().filter(|&t| certify(x, y, v, t)).collect()
}

/// Interior probes must land in `X` shrunk by its margin and boundary probes
/// in the closed box: the image of the closure lying in the closure already
/// forces the open image into the open box.
pub fn certify(x: &Region, y: &Region, v: &VectorFieldModel, t: f64) -> bool {
    y.probes().iter().all(|p| v.flow(t, p).map(|q| x.contains_strictly(&q)).unwrap_or(false))
        && y.boundary_probes().iter().all(|p| v.flow(t, p).map(|q| x.contains_closed(&q)).unwrap_or(false))
}

/// A context `(M, U)`: a vector field with registered regions and a time grid.
#[derive(Debug, Clone)]
pub struct VfObject {
    pub label: String,
    pub field: VectorFieldModel,
    pub regions: Vec<Region>,
    pub time_grid: Vec<f64>,
}

impl VfObject {
    pub fn new(label: impl Into<String>, field: VectorFieldModel, regions: Vec<Region>, time_grid: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if regions.is_empty() {
            return Err(Error::Config(format!("context {label} has no regions")));
        }
        if !time_grid.contains(&0.0) {
            return Err(Error::Config(format!("time grid of {label} must contain 0")));
        }
        if regions.iter().any(|r| r.dim() != field.dim) {
            return Err(Error::Config(format!("region dimension differs from field dimension in {label}")));
        }
        Ok(VfObject { label, field, regions, time_grid })
    }

    pub fn dim(&self) -> usize {
        self.field.dim
    }

    pub fn region_id(&self, r: &Region) -> String {
        format!("{}/{}", self.label, r.label)
    }

    pub fn handle(&self, r: &Region) -> ObjHandle {
        let mut box_data = r.lo.clone();
        box_data.extend(&r.hi);
        ObjHandle::new(self.region_id(r), Payload::Vector(box_data))
    }

    pub fn region(&self, id: &str) -> Option<&Region> {
        self.regions.iter().find(|r| self.region_id(r) == id)
    }

    pub fn find_box(&self, lo: &[f64], hi: &[f64], tol: f64) -> Option<&Region> {
        self.regions.iter().find(|r| r.same_box(lo, hi, tol))
    }
}

pub fn region_handle_time(m: &MorHandle) -> f64 {
    m.payload.as_real().unwrap_or(f64::NAN)
}

/// The dynamical category of a context: regions, certified grid times,
/// composition by adding times.
/// Hom-sets are certified once per region pair. They are closed under
/// composition when the grid is a symmetric lattice covering every
/// certifiable time (see [`lattice_grid`]).
pub fn dyncat(o: &VfObject) -> DynCat {
    let objects: Vec<ObjHandle> = o.regions.iter().map(|r| o.handle(r)).collect();
    let mut table: HashMap<(String, String), Vec<f64>> = HashMap::new();
    for rx in &o.regions {
        for ry in &o.regions {
            table.insert((o.region_id(rx), o.region_id(ry)), mor_set(rx, ry, &o.field, &o.time_grid));
        }
    }
    LazyCategory::builder(format!("G[{}]", o.label))
        .objects(objects)
        .hom(move |x: &ObjHandle, y: &ObjHandle| match table.get(&(x.id.clone(), y.id.clone())) {
            Some(ts) => ts.iter().map(|t| MorHandle::new(x.clone(), y.clone(), Payload::Real(*t))).collect(),
            None => Vec::new(),
        })
        .compose(|g: &MorHandle, h: &MorHandle| MorHandle::new(h.dom.clone(), g.cod.clone(), Payload::Real(region_handle_time(g) + region_handle_time(h))))
        .identity(|x: &ObjHandle| MorHandle::new(x.clone(), x.clone(), Payload::Real(0.0)))
        .distance(|a: &MorHandle, b: &MorHandle| a.distance(b))
        .tol(1e-12)
        .build()
}

/// Function algebras of the regions of `o`, keyed by region handle id.
pub fn region_algebras(o: &VfObject) -> Result<BTreeMap<String, StarAlgebra>> {
    let mut out = BTreeMap::new();
    for r in &o.regions {
        let id = o.region_id(r);
        let alg = StarAlgebra::function_algebra(format!("A[{id}]"), r.dim(), r.probes().to_vec(), Some(r.domain()), FN_EQ_TOL)?;
        out.insert(id, alg);
    }
    Ok(out)
}

/// `F_[M,U]`: `A(X)` the functions on `X`, `τ((X,Y),t) f = f∘ϑ(t)↾Y`.
pub fn dyn_functor(o: &VfObject) -> Result<DynamicalPattern> {
    let algs = Arc::new(region_algebras(o)?);
    let (a1, a2) = (algs.clone(), algs);
    let field = o.field.clone();
    Ok(DynamicalPattern::new(
        format!("F[{}]", o.label),
        dyncat(o),
        move |x| a1[&x.id].clone(),
        move |g: &MorHandle| {
            let t = region_handle_time(g);
            let theta = field.flow_map(t).expect("grid times lie within the step budget");
            PositiveMap::pullback(format!("ϑ({t})*"), &a2[&g.dom.id], &a2[&g.cod.id], theta)
        },
    ))
}

/// A context morphism `(M,U) → (N,V)` given by an affine `φ: N → M`.
#[derive(Debug, Clone)]
pub struct VfMorphism {
    pub label: String,
    pub src: String,
    pub dst: String,
    pub phi: PointMap,
    /// Region of `N` ↦ its registered image region in `M`.
    pub region_images: BTreeMap<String, String>,
}

/// Image box of `r` under an affine map whose linear part is a scaled
/// permutation; `None` otherwise.
fn box_image(phi: &PointMap, r: &Region) -> Option<(Vec<f64>, Vec<f64>)> {
    let a = phi.linear_part()?;
    for i in 0..a.nrows() {
        if a.row(i).iter().filter(|x| **x != 0.0).count() != 1 {
            return None;
        }
    }
    let p = phi.apply(&r.lo);
    let q = phi.apply(&r.hi);
    let lo = p.iter().zip(&q).map(|(a, b)| a.min(*b)).collect();
    let hi = p.iter().zip(&q).map(|(a, b)| a.max(*b)).collect();
    Some((lo, hi))
}

impl VfMorphism {
    /// Resolves every region image of `dst` inside `src`.
    pub fn new(label: impl Into<String>, src: &VfObject, dst: &VfObject, phi: PointMap) -> Result<Self> {
        let label = label.into();
        if phi.linear_part().is_none() {
            return Err(Error::Precondition(format!("{label}: context morphisms must be affine")));
        }
        let mut region_images = BTreeMap::new();
        for y in &dst.regions {
            let (lo, hi) = box_image(&phi, y).ok_or_else(|| Error::Precondition(format!("{label}: linear part is not a scaled permutation")))?;
            let img = src
                .find_box(&lo, &hi, 1e-9)
                .ok_or_else(|| Error::UnregisteredRegion(format!("{label}: image {lo:?}..{hi:?} of {} is not a region of {}", y.label, src.label)))?;
            region_images.insert(dst.region_id(y), src.region_id(img));
        }
        Ok(VfMorphism { label, src: src.label.clone(), dst: dst.label.clone(), phi, region_images })
    }
}

/// Relatedness `dφ V = U∘φ` and flow naturality `φ∘ϑ^V(t) = ϑ^U(t)∘φ` on
/// the probes of every region of `N` and every grid time of `N`.
pub fn check_flow_naturality(m: &VfMorphism, src: &VfObject, dst: &VfObject, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("flow naturality of {}", m.label));
    for y in &dst.regions {
        for p in y.probes() {
            let jp = m.phi.jacobian(p, 1e-6);
            let lhs: Vec<f64> = (jp * DVector::from_vec(dst.field.eval(p))).iter().copied().collect();
            let rhs = src.field.eval(&m.phi.apply(p));
            let d = max_abs_diff(&lhs, &rhs);
            r.record(d, tol, || (vec![dst.region_id(y)], vec![m.label.clone()], format!("dφ V = {lhs:?}"), format!("U∘φ = {rhs:?}")));
            for &t in &dst.time_grid {
                let a = dst.field.flow(t, p).map(|q| m.phi.apply(&q));
                let b = src.field.flow(t, &m.phi.apply(p));
                let d = match (&a, &b) {
                    (Ok(a), Ok(b)) => max_abs_diff(a, b),
                    _ => f64::INFINITY,
                };
                r.record(d, tol, || (vec![dst.region_id(y)], vec![m.label.clone(), format!("t={t}")], format!("φ∘ϑ^V = {a:?}"), format!("ϑ^U∘φ = {b:?}")));
            }
        }
    }
    r
}

/// `[V₁,W₁]` and `[V₂,W₂]` are φ-related when the pairs are, checked on
/// the probes of `N` with central differences of step `h`.
#[allow(clippy::too_many_arguments)]
pub fn check_bracket_related(
    phi: &PointMap,
    probes: &[Vec<f64>],
    v1: &VectorFieldModel,
    w1: &VectorFieldModel,
    v2: &VectorFieldModel,
    w2: &VectorFieldModel,
    h: f64,
    tol: f64,
) -> LawReport {
    let mut r = LawReport::new("bracket relatedness".to_string());
    let related = |a: &VectorFieldModel, b: &VectorFieldModel, p: &[f64]| -> f64 {
        let lhs = phi.jacobian(p, h) * DVector::from_vec(b.eval(p));
        max_abs_diff(lhs.as_slice(), &a.eval(&phi.apply(p)))
    };
    let pre = probes.iter().map(|p| related(v1, v2, p).max(related(w1, w2, p))).fold(0.0, f64::max);
    if pre > tol {
        r.warn(format!("input fields are not φ-related (defect {pre:e})"));
    }
    let b1 = lie_bracket(v1, w1, h);
    let b2 = lie_bracket(v2, w2, h);
    for p in probes {
        let d = related(&b1, &b2, p);
        r.record(d, tol, || (vec![format!("{p:?}")], vec![b1.name.clone(), b2.name.clone()], "dφ [V₂,W₂]".into(), "[V₁,W₁]∘φ".into()));
    }
    r
}

/// Registry of contexts and context morphisms for the flow species.
#[derive(Clone)]
pub struct FlowContexts {
    pub objects: Vec<VfObject>,
    pub morphisms: Vec<VfMorphism>,
    patterns: Arc<HashMap<String, DynamicalPattern>>,
}

impl fmt::Debug for FlowContexts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlowContexts({} objects, {} morphisms)", self.objects.len(), self.morphisms.len())
    }
}

fn affine_payload(phi: &PointMap) -> Payload {
    let a = phi.linear_part().expect("affine");
    let b = phi.apply(&vec![0.0; a.ncols()]);
    let mut data = vec![a.nrows() as f64];
    data.extend(a.iter());
    data.extend(b);
    Payload::Vector(data)
}

/// Decode an affine payload back into a point map.
pub fn payload_affine(p: &Payload) -> Option<PointMap> {
    let Payload::Vector(v) = p else { return None };
    let n = *v.first()? as usize;
    if v.len() != 1 + n * n + n {
        return None;
    }
    let a = DMatrix::from_column_slice(n, n, &v[1..1 + n * n]);
    let b = DVector::from_column_slice(&v[1 + n * n..]);
    Some(PointMap::affine(a, b))
}

impl FlowContexts {
    pub fn new(objects: Vec<VfObject>, morphisms: Vec<VfMorphism>) -> Result<Self> {
        let mut patterns = HashMap::new();
        for o in &objects {
            patterns.insert(o.label.clone(), dyn_functor(o)?);
        }
        for m in &morphisms {
            if !patterns.contains_key(&m.src) || !patterns.contains_key(&m.dst) {
                return Err(Error::Config(format!("morphism {} references an unknown context", m.label)));
            }
        }
        Ok(FlowContexts { objects, morphisms, patterns: Arc::new(patterns) })
    }

    pub fn object(&self, label: &str) -> Option<&VfObject> {
        self.objects.iter().find(|o| o.label == label)
    }

    pub fn pattern(&self, label: &str) -> &DynamicalPattern {
        &self.patterns[label]
    }

    pub fn handle(&self, o: &VfObject) -> ObjHandle {
        ObjHandle::new(o.label.clone(), Payload::None)
    }

    pub fn mor_handle(&self, m: &VfMorphism) -> MorHandle {
        let src = self.object(&m.src).expect("registered");
        let dst = self.object(&m.dst).expect("registered");
        MorHandle::new(self.handle(src), self.handle(dst), affine_payload(&m.phi))
    }

    /// The context category: registered morphisms plus identities; `ψ∘φ`
    /// is the map composite `φ∘ψ`.
    pub fn category(&self, cfg: SamplerConfig) -> LazyCategory<MorHandle> {
        let me = self.clone();
        let objs: Vec<ObjHandle> = self.objects.iter().map(|o| self.handle(o)).collect();
        let dims: HashMap<String, usize> = self.objects.iter().map(|o| (o.label.clone(), o.dim())).collect();
        LazyCategory::builder("Ctx[vf]")
            .objects(objs)
            .hom(move |x: &ObjHandle, y: &ObjHandle| {
                let mut out: Vec<MorHandle> = me.morphisms.iter().filter(|m| m.src == x.id && m.dst == y.id).map(|m| me.mor_handle(m)).collect();
                if x.id == y.id {
                    let n = me.object(&x.id).map(|o| o.dim()).unwrap_or(0);
                    out.insert(0, MorHandle::new(x.clone(), x.clone(), affine_payload(&PointMap::affine(DMatrix::identity(n, n), DVector::zeros(n)))));
                }
                out
            })
            .compose(|g: &MorHandle, h: &MorHandle| {
                let pg = payload_affine(&g.payload).expect("affine payload");
                let ph = payload_affine(&h.payload).expect("affine payload");
                let a = ph.linear_part().expect("affine") * pg.linear_part().expect("affine");
                let n = a.nrows();
                let b = DVector::from_vec(ph.apply(&pg.apply(&vec![0.0; n])));
                MorHandle::new(h.dom.clone(), g.cod.clone(), affine_payload(&PointMap::affine(a, b)))
            })
            .identity(move |x: &ObjHandle| {
                let n = dims.get(&x.id).copied().unwrap_or(0);
                MorHandle::new(x.clone(), x.clone(), affine_payload(&PointMap::affine(DMatrix::identity(n, n), DVector::zeros(n))))
            })
            .distance(|a: &MorHandle, b: &MorHandle| a.distance(b))
            .sampler_config(cfg)
            .tol(1e-12)
            .build()
    }

    /// `(f_φ, T_φ)` with `f_φ(Y) = φ(Y)`, `f_φ((Y,Z),t) = ((φY,φZ),t)` and
    /// `T_φ(Y) h = h∘φ↾Y`.
    pub fn dp_morphism(&self, m: &MorHandle) -> Result<DpMorphism> {
        let phi = payload_affine(&m.payload).ok_or_else(|| Error::Precondition("context morphism without affine payload".into()))?;
        let src = self.object(&m.dom.id).ok_or_else(|| Error::Config(format!("unknown context {}", m.dom.id)))?;
        let dst = self.object(&m.cod.id).ok_or_else(|| Error::Config(format!("unknown context {}", m.cod.id)))?;
        let vm = VfMorphism::new(format!("φ[{}→{}]", src.label, dst.label), src, dst, phi.clone())?;
        let (sp, dp) = (self.pattern(&src.label).clone(), self.pattern(&dst.label).clone());
        let images = Arc::new(vm.region_images.clone());
        let handles: Arc<HashMap<String, ObjHandle>> = Arc::new(src.regions.iter().map(|r| (src.region_id(r), src.handle(r))).collect());
        let (i1, h1, i2, h2) = (images.clone(), handles.clone(), images, handles);
        let desc = phi.describe();
        let f = FunctorMap::new(
            format!("f[{desc}]"),
            dp.g().clone(),
            sp.g().clone(),
            move |y: &ObjHandle| h1[&i1[&y.id]].clone(),
            move |g: &MorHandle| MorHandle::new(h2[&i2[&g.dom.id]].clone(), h2[&i2[&g.cod.id]].clone(), g.payload.clone()),
        );
        let (sp2, dp2, f2) = (sp.clone(), dp.clone(), f.clone());
        DpMorphism::new(format!("T[{desc}]"), &sp, &dp, f, move |y| {
            PositiveMap::pullback(format!("({desc})*"), &sp2.algebra(&f2.obj(y)), &dp2.algebra(y), phi.clone())
        })
    }

    /// The flow species `𝔞 = Ψ∘(F, T)` as a functor into Chdv.
    pub fn species(&self, cfg: SamplerConfig, tol: f64) -> crate::species::Species {
        let me = self.clone();
        let me2 = self.clone();
        let ctx = self.category(cfg);
        let chdv = chdv_category("Chdv", Vec::new(), Vec::new(), tol, cfg);
        let map: FunctorMap<MorHandle, ChdvMorphism> = FunctorMap::new(
            "𝔞",
            ctx,
            chdv,
            move |x: &ObjHandle| me.pattern(&x.id).clone(),
            move |m: &MorHandle| psi(&me2.dp_morphism(m).expect("registered context morphism")),
        );
        crate::species::Species::new("𝔞", map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_flow_by_pi_negates() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let v = VectorFieldModel::linear("rot", a);
        let q = v.flow(std::f64::consts::PI, &[0.3, -0.7]).unwrap();
        assert!((q[0] + 0.3).abs() < 1e-12 && (q[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn numeric_translation_matches_closed_form() {
        let v = VectorFieldModel::translation("u", vec![1.0, -0.5]);
        let n = v.as_numeric(0.01);
        let a = v.flow(0.73, &[0.1, 0.2]).unwrap();
        let b = n.flow(0.73, &[0.1, 0.2]).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn grid_multiples_reproduce_bitwise() {
        let v = VectorFieldModel::linear("l", DMatrix::from_row_slice(1, 1, &[0.3])).as_numeric(0.01);
        let p = v.flow(0.05, &[1.0]).unwrap();
        let q = v.flow(0.05, &p).unwrap();
        assert_eq!(q, v.flow(0.1, &[1.0]).unwrap());
    }

    #[test]
    fn step_budget_error() {
        let mut v = VectorFieldModel::translation("u", vec![1.0]).as_numeric(0.1);
        if let FieldKind::Numeric { max_steps, .. } = &mut v.kind {
            *max_steps = 5;
        }
        assert!(matches!(v.flow(1.0, &[0.0]), Err(Error::StepBudget(_))));
    }

    #[test]
    fn mor_set_unit_translation() {
        let v = VectorFieldModel::translation("u", vec![1.0]);
        let x = Region::new("X", vec![-2.0], vec![2.0], 4, None).unwrap();
        let y = Region::new("Y", vec![0.0], vec![1.0], 4, None).unwrap();
        assert_eq!(mor_set(&x, &y, &v, &[-1.0, 0.0, 1.0]), vec![-1.0, 0.0, 1.0]);
        assert_eq!(mor_set(&y, &y, &v, &[-1.0, 0.0, 1.0]), vec![0.0]);
    }
}
