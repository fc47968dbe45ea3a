//! Lazily presented categories, functors and natural transformations.
//!
//! A category is a bundle of callbacks (hom enumeration, composition,
//! identities, a morphism distance) plus a finite seeded sampler of objects,
//! morphisms and composable pairs/triples. Every law is checked on the sampler.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::LawReport;

pub const DEFAULT_SEED: u64 = 0xD9A1;

pub trait CatObject: Clone + fmt::Debug + Send + Sync + 'static {
    fn id(&self) -> String;
}

pub trait CatMorphism: Clone + fmt::Debug + Send + Sync + 'static {
    type Obj: CatObject;
    fn dom(&self) -> Self::Obj;
    fn cod(&self) -> Self::Obj;
    fn label(&self) -> String;
}

/// Domain data carried by generic handles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    None,
    Int(i64),
    Real(f64),
    Vector(Vec<f64>),
    Text(String),
}

impl Payload {
    /// Default payload distance: exact for discrete payloads, absolute for reals.
    pub fn distance(&self, other: &Payload) -> f64 {
        match (self, other) {
            (Payload::Real(a), Payload::Real(b)) => (a - b).abs(),
            (Payload::Int(a), Payload::Int(b)) => {
                if a == b {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            (Payload::Real(a), Payload::Int(b)) | (Payload::Int(b), Payload::Real(a)) => (a - *b as f64).abs(),
            (Payload::Vector(a), Payload::Vector(b)) if a.len() == b.len() => {
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
            (a, b) => {
                if a == b {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Payload::Real(x) => Some(*x),
            Payload::Int(k) => Some(*k as f64),
            _ => None,
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::None => write!(f, "-"),
            Payload::Int(k) => write!(f, "{k}"),
            Payload::Real(x) => write!(f, "{x}"),
            Payload::Vector(v) => write!(f, "{v:?}"),
            Payload::Text(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjHandle {
    pub id: String,
    pub payload: Payload,
}

impl ObjHandle {
    pub fn new(id: impl Into<String>, payload: Payload) -> Self {
        ObjHandle { id: id.into(), payload }
    }
}

impl CatObject for ObjHandle {
    fn id(&self) -> String {
        self.id.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorHandle {
    pub dom: ObjHandle,
    pub cod: ObjHandle,
    pub payload: Payload,
}

impl MorHandle {
    pub fn new(dom: ObjHandle, cod: ObjHandle, payload: Payload) -> Self {
        MorHandle { dom, cod, payload }
    }

    /// Default handle distance: infinite across different endpoints.
    pub fn distance(&self, other: &MorHandle) -> f64 {
        if self.dom.id != other.dom.id || self.cod.id != other.cod.id {
            f64::INFINITY
        } else {
            self.payload.distance(&other.payload)
        }
    }
}

impl CatMorphism for MorHandle {
    type Obj = ObjHandle;
    fn dom(&self) -> ObjHandle {
        self.dom.clone()
    }
    fn cod(&self) -> ObjHandle {
        self.cod.clone()
    }
    fn label(&self) -> String {
        format!("{}->{}:{}", self.dom.id, self.cod.id, self.payload)
    }
}

/// Morphism of the opposite category.
#[derive(Debug, Clone)]
pub struct Op<M>(pub M);

impl<M: CatMorphism> CatMorphism for Op<M> {
    type Obj = M::Obj;
    fn dom(&self) -> M::Obj {
        self.0.cod()
    }
    fn cod(&self) -> M::Obj {
        self.0.dom()
    }
    fn label(&self) -> String {
        format!("op({})", self.0.label())
    }
}

type HomFn<M> = Arc<dyn Fn(&<M as CatMorphism>::Obj, &<M as CatMorphism>::Obj) -> Vec<M> + Send + Sync>;
type ComposeFn<M> = Arc<dyn Fn(&M, &M) -> M + Send + Sync>;
type IdentityFn<M> = Arc<dyn Fn(&<M as CatMorphism>::Obj) -> M + Send + Sync>;
type DistanceFn<M> = Arc<dyn Fn(&M, &M) -> f64 + Send + Sync>;

/// Finite sample of a category used by the law checkers.
#[derive(Debug, Clone)]
pub struct Sampler<M: CatMorphism> {
    pub objects: Vec<M::Obj>,
    pub morphisms: Vec<M>,
    /// `(g, h)` with `cod(h) = dom(g)`.
    pub pairs: Vec<(M, M)>,
    /// `(f, g, h)` with `f∘g∘h` defined.
    pub triples: Vec<(M, M, M)>,
}

impl<M: CatMorphism> Default for Sampler<M> {
    fn default() -> Self {
        Sampler { objects: Vec::new(), morphisms: Vec::new(), pairs: Vec::new(), triples: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub seed: u64,
    pub max_morphisms: usize,
    pub max_pairs: usize,
    pub max_triples: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { seed: DEFAULT_SEED, max_morphisms: 2000, max_pairs: 600, max_triples: 600 }
    }
}

impl<M: CatMorphism> Sampler<M> {
    /// Build a sampler from a finite morphism list: composable pairs and
    /// triples are enumerated when few, otherwise drawn with a seeded RNG.
    pub fn from_morphisms(objects: Vec<M::Obj>, mut morphisms: Vec<M>, cfg: &SamplerConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        if morphisms.len() > cfg.max_morphisms {
            let mut idx = rand::seq::index::sample(&mut rng, morphisms.len(), cfg.max_morphisms).into_vec();
            idx.sort_unstable();
            morphisms = idx.into_iter().map(|i| morphisms[i].clone()).collect();
        }
        let mut by_dom: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, m) in morphisms.iter().enumerate() {
            by_dom.entry(m.dom().id()).or_default().push(i);
        }
        let next = |i: usize| -> &[usize] { by_dom.get(&morphisms[i].cod().id()).map(|v| v.as_slice()).unwrap_or(&[]) };

        let pair_count: usize = (0..morphisms.len()).map(|h| next(h).len()).sum();
        let mut pairs = Vec::new();
        if pair_count <= cfg.max_pairs {
            for h in 0..morphisms.len() {
                for &g in next(h) {
                    pairs.push((morphisms[g].clone(), morphisms[h].clone()));
                }
            }
        } else {
            let mut guard = 0;
            while pairs.len() < cfg.max_pairs && guard < cfg.max_pairs * 50 {
                guard += 1;
                let h = rng.gen_range(0..morphisms.len());
                let gs = next(h);
                if gs.is_empty() {
                    continue;
                }
                let g = gs[rng.gen_range(0..gs.len())];
                pairs.push((morphisms[g].clone(), morphisms[h].clone()));
            }
        }

        let triple_count: usize = (0..morphisms.len()).map(|h| next(h).iter().map(|&g| next(g).len()).sum::<usize>()).sum();
        let mut triples = Vec::new();
        if triple_count <= cfg.max_triples {
            for h in 0..morphisms.len() {
                for &g in next(h) {
                    for &f in next(g) {
                        triples.push((morphisms[f].clone(), morphisms[g].clone(), morphisms[h].clone()));
                    }
                }
            }
        } else {
            let mut guard = 0;
            while triples.len() < cfg.max_triples && guard < cfg.max_triples * 50 {
                guard += 1;
                let h = rng.gen_range(0..morphisms.len());
                let gs = next(h);
                if gs.is_empty() {
                    continue;
                }
                let g = gs[rng.gen_range(0..gs.len())];
                let fs = next(g);
                if fs.is_empty() {
                    continue;
                }
                let f = fs[rng.gen_range(0..fs.len())];
                triples.push((morphisms[f].clone(), morphisms[g].clone(), morphisms[h].clone()));
            }
        }
        Sampler { objects, morphisms, pairs, triples }
    }
}

struct CategoryData<M: CatMorphism> {
    name: String,
    objects: Vec<M::Obj>,
    hom: HomFn<M>,
    compose: ComposeFn<M>,
    identity: IdentityFn<M>,
    distance: DistanceFn<M>,
    sampler: Sampler<M>,
    tol: f64,
    notes: Vec<String>,
}

/// A category presented by callbacks plus a finite sampler.
pub struct LazyCategory<M: CatMorphism> {
    inner: Arc<CategoryData<M>>,
}

impl<M: CatMorphism> Clone for LazyCategory<M> {
    fn clone(&self) -> Self {
        LazyCategory { inner: Arc::clone(&self.inner) }
    }
}

impl<M: CatMorphism> fmt::Debug for LazyCategory<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyCategory")
            .field("name", &self.inner.name)
            .field("objects", &self.inner.objects.len())
            .field("sampled_morphisms", &self.inner.sampler.morphisms.len())
            .finish()
    }
}

pub struct CategoryBuilder<M: CatMorphism> {
    name: String,
    objects: Vec<M::Obj>,
    hom: Option<HomFn<M>>,
    compose: Option<ComposeFn<M>>,
    identity: Option<IdentityFn<M>>,
    distance: Option<DistanceFn<M>>,
    extra: Vec<M>,
    explicit: Option<Sampler<M>>,
    cfg: SamplerConfig,
    tol: f64,
    notes: Vec<String>,
}

impl<M: CatMorphism> CategoryBuilder<M> {
    pub fn objects(mut self, objects: Vec<M::Obj>) -> Self {
        self.objects = objects;
        self
    }
    pub fn hom(mut self, f: impl Fn(&M::Obj, &M::Obj) -> Vec<M> + Send + Sync + 'static) -> Self {
        self.hom = Some(Arc::new(f));
        self
    }
    pub fn compose(mut self, f: impl Fn(&M, &M) -> M + Send + Sync + 'static) -> Self {
        self.compose = Some(Arc::new(f));
        self
    }
    pub fn identity(mut self, f: impl Fn(&M::Obj) -> M + Send + Sync + 'static) -> Self {
        self.identity = Some(Arc::new(f));
        self
    }
    pub fn distance(mut self, f: impl Fn(&M, &M) -> f64 + Send + Sync + 'static) -> Self {
        self.distance = Some(Arc::new(f));
        self
    }
    /// Extra morphisms added to the sampler besides the enumerated hom-sets.
    pub fn extra_morphisms(mut self, ms: Vec<M>) -> Self {
        self.extra = ms;
        self
    }
    pub fn sampler(mut self, s: Sampler<M>) -> Self {
        self.explicit = Some(s);
        self
    }
    pub fn sampler_config(mut self, cfg: SamplerConfig) -> Self {
        self.cfg = cfg;
        self
    }
    pub fn seed(mut self, seed: u64) -> Self {
        self.cfg.seed = seed;
        self
    }
    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn build(self) -> LazyCategory<M> {
        let compose = self.compose.expect("category needs a composition callback");
        let identity = self.identity.expect("category needs an identity callback");
        let distance = self.distance.expect("category needs a distance callback");
        let hom: HomFn<M> = self.hom.unwrap_or_else(|| Arc::new(|_, _| Vec::new()));
        let sampler = match self.explicit {
            Some(s) => s,
            None => {
                let mut ms = Vec::new();
                for x in &self.objects {
                    for y in &self.objects {
                        ms.extend(hom(x, y));
                    }
                }
                ms.extend(self.extra);
                Sampler::from_morphisms(self.objects.clone(), ms, &self.cfg)
            }
        };
        LazyCategory {
            inner: Arc::new(CategoryData {
                name: self.name,
                objects: self.objects,
                hom,
                compose,
                identity,
                distance,
                sampler,
                tol: self.tol,
                notes: self.notes,
            }),
        }
    }
}

impl<M: CatMorphism> LazyCategory<M> {
    pub fn builder(name: impl Into<String>) -> CategoryBuilder<M> {
        CategoryBuilder {
            name: name.into(),
            objects: Vec::new(),
            hom: None,
            compose: None,
            identity: None,
            distance: None,
            extra: Vec::new(),
            explicit: None,
            cfg: SamplerConfig::default(),
            tol: 1e-12,
            notes: vec!["continuity of composition in the hom topology is not checked".into()],
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }
    pub fn objects(&self) -> &[M::Obj] {
        &self.inner.objects
    }
    pub fn sampler(&self) -> &Sampler<M> {
        &self.inner.sampler
    }
    pub fn tol(&self) -> f64 {
        self.inner.tol
    }
    pub fn notes(&self) -> &[String] {
        &self.inner.notes
    }
    pub fn hom(&self, x: &M::Obj, y: &M::Obj) -> Vec<M> {
        (self.inner.hom)(x, y)
    }
    pub fn identity(&self, x: &M::Obj) -> M {
        (self.inner.identity)(x)
    }
    pub fn distance(&self, a: &M, b: &M) -> f64 {
        (self.inner.distance)(a, b)
    }

    /// `g∘h`, defined iff `cod(h) = dom(g)`.
    pub fn compose(&self, g: &M, h: &M) -> Result<M> {
        if h.cod().id() != g.dom().id() {
            return Err(Error::CompositionDomain(format!(
                "in {}: cod({}) = {} but dom({}) = {}",
                self.inner.name,
                h.label(),
                h.cod().id(),
                g.label(),
                g.dom().id()
            )));
        }
        Ok((self.inner.compose)(g, h))
    }

    pub fn contains_object(&self, x: &M::Obj) -> bool {
        let id = x.id();
        self.inner.objects.iter().any(|o| o.id() == id)
    }

    /// Distance from `m` to the nearest element of its hom-set.
    pub fn hom_distance(&self, m: &M) -> f64 {
        self.hom(&m.dom(), &m.cod()).iter().map(|h| self.distance(h, m)).fold(f64::INFINITY, f64::min)
    }

    /// Same composition, identities and distance with fewer objects/morphisms.
    pub fn restrict(
        &self,
        name: impl Into<String>,
        objects: Vec<M::Obj>,
        hom: impl Fn(&M::Obj, &M::Obj) -> Vec<M> + Send + Sync + 'static,
        cfg: SamplerConfig,
    ) -> LazyCategory<M> {
        let parent = self.clone();
        let p2 = self.clone();
        let p3 = self.clone();
        LazyCategory::builder(name)
            .objects(objects)
            .hom(hom)
            .compose(move |g, h| (parent.inner.compose)(g, h))
            .identity(move |x| (p2.inner.identity)(x))
            .distance(move |a, b| (p3.inner.distance)(a, b))
            .tol(self.inner.tol)
            .sampler_config(cfg)
            .build()
    }

    pub fn opposite(&self) -> LazyCategory<Op<M>> {
        let c1 = self.clone();
        let c2 = self.clone();
        let c3 = self.clone();
        let c4 = self.clone();
        let s = self.sampler();
        let sampler = Sampler {
            objects: s.objects.clone(),
            morphisms: s.morphisms.iter().cloned().map(Op).collect(),
            pairs: s.pairs.iter().map(|(g, h)| (Op(h.clone()), Op(g.clone()))).collect(),
            triples: s.triples.iter().map(|(f, g, h)| (Op(h.clone()), Op(g.clone()), Op(f.clone()))).collect(),
        };
        LazyCategory::builder(format!("{}^op", self.name()))
            .objects(self.objects().to_vec())
            .hom(move |x, y| c1.hom(y, x).into_iter().map(Op).collect())
            .compose(move |g: &Op<M>, h: &Op<M>| Op((c2.inner.compose)(&h.0, &g.0)))
            .identity(move |x| Op(c3.identity(x)))
            .distance(move |a, b| c4.distance(&a.0, &b.0))
            .tol(self.tol())
            .sampler(sampler)
            .build()
    }
}

type ObjMapFn<A, B> = Arc<dyn Fn(&<A as CatMorphism>::Obj) -> <B as CatMorphism>::Obj + Send + Sync>;
type MorMapFn<A, B> = Arc<dyn Fn(&A) -> B + Send + Sync>;

pub struct FunctorMap<A: CatMorphism, B: CatMorphism> {
    pub name: String,
    pub source: LazyCategory<A>,
    pub target: LazyCategory<B>,
    obj_map: ObjMapFn<A, B>,
    mor_map: MorMapFn<A, B>,
}

impl<A: CatMorphism, B: CatMorphism> Clone for FunctorMap<A, B> {
    fn clone(&self) -> Self {
        FunctorMap {
            name: self.name.clone(),
            source: self.source.clone(),
            target: self.target.clone(),
            obj_map: Arc::clone(&self.obj_map),
            mor_map: Arc::clone(&self.mor_map),
        }
    }
}

impl<A: CatMorphism, B: CatMorphism> fmt::Debug for FunctorMap<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctorMap({}: {} -> {})", self.name, self.source.name(), self.target.name())
    }
}

impl<A: CatMorphism, B: CatMorphism> FunctorMap<A, B> {
    pub fn new(
        name: impl Into<String>,
        source: LazyCategory<A>,
        target: LazyCategory<B>,
        obj_map: impl Fn(&A::Obj) -> B::Obj + Send + Sync + 'static,
        mor_map: impl Fn(&A) -> B + Send + Sync + 'static,
    ) -> Self {
        FunctorMap { name: name.into(), source, target, obj_map: Arc::new(obj_map), mor_map: Arc::new(mor_map) }
    }

    pub fn obj(&self, x: &A::Obj) -> B::Obj {
        (self.obj_map)(x)
    }
    pub fn mor(&self, m: &A) -> B {
        (self.mor_map)(m)
    }

    /// The same functor between opposite categories.
    pub fn opposite(&self) -> FunctorMap<Op<A>, Op<B>> {
        let f = self.clone();
        let g = self.clone();
        FunctorMap::new(
            format!("{}^op", self.name),
            self.source.opposite(),
            self.target.opposite(),
            move |x| f.obj(x),
            move |m: &Op<A>| Op(g.mor(&m.0)),
        )
    }

    /// Same functor with a different (e.g. restricted) source category.
    pub fn with_source(&self, source: LazyCategory<A>) -> Self {
        FunctorMap { source, ..self.clone() }
    }

    /// Same functor with a different target presentation.
    pub fn with_target(&self, target: LazyCategory<B>) -> Self {
        FunctorMap { target, ..self.clone() }
    }
}

impl<M: CatMorphism> FunctorMap<M, M> {
    pub fn identity(cat: &LazyCategory<M>) -> Self {
        FunctorMap::new(format!("1_{}", cat.name()), cat.clone(), cat.clone(), |x| x.clone(), |m| m.clone())
    }
}

/// `G∘F`.
pub fn compose_functors<A: CatMorphism, B: CatMorphism, C: CatMorphism>(
    g: &FunctorMap<B, C>,
    f: &FunctorMap<A, B>,
) -> Result<FunctorMap<A, C>> {
    if g.source.name() != f.target.name() {
        return Err(Error::CompositionDomain(format!(
            "functor {} targets {} but {} starts at {}",
            f.name,
            f.target.name(),
            g.name,
            g.source.name()
        )));
    }
    let (g1, f1, g2, f2) = (g.clone(), f.clone(), g.clone(), f.clone());
    Ok(FunctorMap::new(
        format!("{}∘{}", g.name, f.name),
        f.source.clone(),
        g.target.clone(),
        move |x| g1.obj(&f1.obj(x)),
        move |m| g2.mor(&f2.mor(m)),
    ))
}

/// Extensional functor equality on the sampler of `f`'s source.
pub fn functors_agree<A: CatMorphism, B: CatMorphism>(f: &FunctorMap<A, B>, g: &FunctorMap<A, B>, tol: f64) -> bool {
    if f.name == g.name && f.source.name() == g.source.name() && f.target.name() == g.target.name() {
        return true;
    }
    if f.source.name() != g.source.name() || f.target.name() != g.target.name() {
        return false;
    }
    let s = f.source.sampler();
    s.objects.iter().all(|x| f.obj(x).id() == g.obj(x).id())
        && s.morphisms.iter().all(|m| f.target.distance(&f.mor(m), &g.mor(m)) <= tol)
}

type ComponentFn<A, B> = Arc<dyn Fn(&<A as CatMorphism>::Obj) -> B + Send + Sync>;

pub struct NatTransMap<A: CatMorphism, B: CatMorphism> {
    pub name: String,
    pub source: FunctorMap<A, B>,
    pub target: FunctorMap<A, B>,
    component: ComponentFn<A, B>,
}

impl<A: CatMorphism, B: CatMorphism> Clone for NatTransMap<A, B> {
    fn clone(&self) -> Self {
        NatTransMap {
            name: self.name.clone(),
            source: self.source.clone(),
            target: self.target.clone(),
            component: Arc::clone(&self.component),
        }
    }
}

impl<A: CatMorphism, B: CatMorphism> fmt::Debug for NatTransMap<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NatTransMap({}: {} => {})", self.name, self.source.name, self.target.name)
    }
}

impl<A: CatMorphism, B: CatMorphism> NatTransMap<A, B> {
    pub fn new(
        name: impl Into<String>,
        source: FunctorMap<A, B>,
        target: FunctorMap<A, B>,
        component: impl Fn(&A::Obj) -> B + Send + Sync + 'static,
    ) -> Self {
        NatTransMap { name: name.into(), source, target, component: Arc::new(component) }
    }

    pub fn at(&self, x: &A::Obj) -> B {
        (self.component)(x)
    }

    pub fn identity(f: &FunctorMap<A, B>) -> Self {
        let f1 = f.clone();
        NatTransMap::new(format!("1_{}", f.name), f.clone(), f.clone(), move |x| f1.target.identity(&f1.obj(x)))
    }
}

/// `(S∘T)(M) = S(M)∘T(M)`.
pub fn vcompose_nat<A: CatMorphism, B: CatMorphism>(s: &NatTransMap<A, B>, t: &NatTransMap<A, B>) -> Result<NatTransMap<A, B>> {
    if !functors_agree(&t.target, &s.source, t.target.target.tol()) {
        return Err(Error::FunctorMismatch(format!(
            "{} ends at {} but {} starts at {}",
            t.name, t.target.name, s.name, s.source.name
        )));
    }
    let (s1, t1) = (s.clone(), t.clone());
    let cat = s.source.target.clone();
    Ok(NatTransMap::new(format!("{}∘{}", s.name, t.name), t.source.clone(), s.target.clone(), move |x| {
        cat.compose(&s1.at(x), &t1.at(x)).expect("vertical composite of matching components")
    }))
}

/// Godement product `β∗α`, component `β(G(M))∘H(α(M))` for `α: F⇒G`, `β: H⇒K`.
pub fn hcompose_nat<A: CatMorphism, B: CatMorphism, C: CatMorphism>(
    beta: &NatTransMap<B, C>,
    alpha: &NatTransMap<A, B>,
) -> Result<NatTransMap<A, C>> {
    if beta.source.source.name() != alpha.source.target.name() {
        return Err(Error::CompositionDomain(format!(
            "{} lives over {} but {} lands in {}",
            beta.name,
            beta.source.source.name(),
            alpha.name,
            alpha.source.target.name()
        )));
    }
    let src = compose_functors(&beta.source, &alpha.source)?;
    let tgt = compose_functors(&beta.target, &alpha.target)?;
    let (b1, a1) = (beta.clone(), alpha.clone());
    let cat = beta.source.target.clone();
    Ok(NatTransMap::new(format!("{}*{}", beta.name, alpha.name), src, tgt, move |x| {
        let gx = a1.target.obj(x);
        let h_alpha = b1.source.mor(&a1.at(x));
        cat.compose(&b1.at(&gx), &h_alpha).expect("Godement components compose")
    }))
}

/// `β∗1_F`.
pub fn whisker<A: CatMorphism, B: CatMorphism, C: CatMorphism>(
    beta: &NatTransMap<B, C>,
    f: &FunctorMap<A, B>,
) -> Result<NatTransMap<A, C>> {
    hcompose_nat(beta, &NatTransMap::identity(f))
}

fn sampled<M: CatMorphism>(cat: &LazyCategory<M>) -> &Sampler<M> {
    cat.sampler()
}

/// Identity neutrality, associativity and endpoint bookkeeping on the sampler.
pub fn check_category_laws<M: CatMorphism>(cat: &LazyCategory<M>, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("category laws of {}", cat.name()));
    let s = sampled(cat);
    for m in &s.morphisms {
        let (x, y) = (m.dom(), m.cod());
        let left = cat.compose(&cat.identity(&y), m);
        let right = cat.compose(m, &cat.identity(&x));
        for (side, res) in [("left", left), ("right", right)] {
            let d = match &res {
                Ok(c) => cat.distance(c, m),
                Err(_) => f64::INFINITY,
            };
            r.record(d, tol, || {
                (vec![x.id(), y.id()], vec![m.label()], format!("{side} unit: {:?}", res.map(|c| c.label())), m.label())
            });
        }
    }
    for (f, g, h) in &s.triples {
        let lhs = cat.compose(f, g).and_then(|fg| cat.compose(&fg, h));
        let rhs = cat.compose(g, h).and_then(|gh| cat.compose(f, &gh));
        let d = match (&lhs, &rhs) {
            (Ok(a), Ok(b)) => cat.distance(a, b),
            _ => f64::INFINITY,
        };
        r.record(d, tol, || {
            (
                vec![h.dom().id(), h.cod().id(), g.cod().id(), f.cod().id()],
                vec![f.label(), g.label(), h.label()],
                format!("{:?}", lhs.map(|m| m.label())),
                format!("{:?}", rhs.map(|m| m.label())),
            )
        });
    }
    for (g, h) in &s.pairs {
        if let Ok(c) = cat.compose(g, h) {
            let ok = c.dom().id() == h.dom().id() && c.cod().id() == g.cod().id();
            r.record_bool(ok, || (vec![h.dom().id(), g.cod().id()], vec![g.label(), h.label()], c.label(), "endpoints".into()));
        }
    }
    r
}

/// Endpoint, identity and composition preservation on the source sampler.
pub fn check_functor_laws<A: CatMorphism, B: CatMorphism>(f: &FunctorMap<A, B>, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("functor laws of {}", f.name));
    let s = sampled(&f.source);
    let tgt = &f.target;
    for m in &s.morphisms {
        let fm = f.mor(m);
        let ok = fm.dom().id() == f.obj(&m.dom()).id() && fm.cod().id() == f.obj(&m.cod()).id();
        r.record_bool(ok, || {
            (
                vec![m.dom().id(), m.cod().id()],
                vec![m.label()],
                format!("{} -> {}", fm.dom().id(), fm.cod().id()),
                format!("{} -> {}", f.obj(&m.dom()).id(), f.obj(&m.cod()).id()),
            )
        });
    }
    for x in &s.objects {
        let lhs = f.mor(&f.source.identity(x));
        let rhs = tgt.identity(&f.obj(x));
        let d = tgt.distance(&lhs, &rhs);
        r.record(d, tol, || (vec![x.id()], vec![format!("id_{}", x.id())], lhs.label(), rhs.label()));
    }
    for (g, h) in &s.pairs {
        let lhs = f.source.compose(g, h).map(|gh| f.mor(&gh));
        let rhs = tgt.compose(&f.mor(g), &f.mor(h));
        let d = match (&lhs, &rhs) {
            (Ok(a), Ok(b)) => tgt.distance(a, b),
            _ => f64::INFINITY,
        };
        r.record(d, tol, || {
            (
                vec![h.dom().id(), h.cod().id(), g.cod().id()],
                vec![g.label(), h.label()],
                format!("{:?}", lhs.map(|m| m.label())),
                format!("{:?}", rhs.map(|m| m.label())),
            )
        });
    }
    r
}

/// Squares `T(y)∘F(f) = G(f)∘T(x)` on sampled `f: x → y`.
pub fn check_naturality<A: CatMorphism, B: CatMorphism>(t: &NatTransMap<A, B>, tol: f64) -> LawReport {
    let mut r = LawReport::new(format!("naturality of {}", t.name));
    let s = sampled(&t.source.source);
    let cat = &t.source.target;
    for x in &s.objects {
        let c = t.at(x);
        let ok = c.dom().id() == t.source.obj(x).id() && c.cod().id() == t.target.obj(x).id();
        r.record_bool(ok, || {
            (
                vec![x.id()],
                vec![c.label()],
                format!("{} -> {}", c.dom().id(), c.cod().id()),
                format!("{} -> {}", t.source.obj(x).id(), t.target.obj(x).id()),
            )
        });
    }
    for f in &s.morphisms {
        let (x, y) = (f.dom(), f.cod());
        let lhs = cat.compose(&t.at(&y), &t.source.mor(f));
        let rhs = cat.compose(&t.target.mor(f), &t.at(&x));
        let d = match (&lhs, &rhs) {
            (Ok(a), Ok(b)) => cat.distance(a, b),
            _ => f64::INFINITY,
        };
        r.record(d, tol, || {
            (
                vec![x.id(), y.id()],
                vec![f.label()],
                format!("{:?}", lhs.map(|m| m.label())),
                format!("{:?}", rhs.map(|m| m.label())),
            )
        });
    }
    r
}

/// `(δ∗γ)∘(β∗α) = (δ∘β)∗(γ∘α)` componentwise on the sampled objects of the
/// first category, for `α: F⇒H`, `γ: H⇒L` over `A → B` and `β: G⇒K`, `δ: K⇒M`
/// over `B → C`.
pub fn check_interchange<A: CatMorphism, B: CatMorphism, C: CatMorphism>(
    delta: &NatTransMap<B, C>,
    gamma: &NatTransMap<A, B>,
    beta: &NatTransMap<B, C>,
    alpha: &NatTransMap<A, B>,
    tol: f64,
) -> Result<LawReport> {
    let lhs = vcompose_nat(&hcompose_nat(delta, gamma)?, &hcompose_nat(beta, alpha)?)?;
    let rhs = hcompose_nat(&vcompose_nat(delta, beta)?, &vcompose_nat(gamma, alpha)?)?;
    let mut r = LawReport::new("interchange law".to_string());
    let cat = &delta.source.target;
    for x in &alpha.source.source.sampler().objects {
        let (a, b) = (lhs.at(x), rhs.at(x));
        let d = cat.distance(&a, &b);
        r.record(d, tol, || (vec![x.id()], vec![], a.label(), b.label()));
    }
    Ok(r)
}

/// The chain category `0 < 1 < … < n-1` as a poset category.
pub fn poset_category(name: &str, n: usize) -> LazyCategory<MorHandle> {
    let objs: Vec<ObjHandle> = (0..n).map(|i| ObjHandle::new(format!("{name}{i}"), Payload::Int(i as i64))).collect();
    let key = |o: &ObjHandle| match o.payload {
        Payload::Int(i) => i,
        _ => -1,
    };
    LazyCategory::builder(name)
        .objects(objs)
        .hom(move |x, y| {
            if key(x) <= key(y) {
                vec![MorHandle::new(x.clone(), y.clone(), Payload::None)]
            } else {
                Vec::new()
            }
        })
        .compose(|g, h| MorHandle::new(h.dom.clone(), g.cod.clone(), Payload::None))
        .identity(|x| MorHandle::new(x.clone(), x.clone(), Payload::None))
        .distance(|a, b| a.distance(b))
        .build()
}

/// One-object category of real times under addition, sampled on `times`.
pub fn time_monoid(name: &str, times: &[f64]) -> LazyCategory<MorHandle> {
    let star = ObjHandle::new(format!("{name}*"), Payload::None);
    let ts = times.to_vec();
    let s2 = star.clone();
    LazyCategory::builder(name)
        .objects(vec![star])
        .hom(move |x: &ObjHandle, y: &ObjHandle| ts.iter().map(|t| MorHandle::new(x.clone(), y.clone(), Payload::Real(*t))).collect())
        .compose(|g, h| {
            let t = g.payload.as_real().unwrap_or(0.0) + h.payload.as_real().unwrap_or(0.0);
            MorHandle::new(h.dom.clone(), g.cod.clone(), Payload::Real(t))
        })
        .identity(move |_| MorHandle::new(s2.clone(), s2.clone(), Payload::Real(0.0)))
        .distance(|a, b| a.distance(b))
        .build()
}
