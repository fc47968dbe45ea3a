use dynspecies::category::*;

const TIMES: [f64; 6] = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5];

fn star(c: &LazyCategory<MorHandle>) -> ObjHandle {
    c.objects()[0].clone()
}

fn time(m: &MorHandle) -> f64 {
    m.payload.as_real().unwrap()
}

/// `t ↦ k·t` on the time monoid.
fn scaling(name: &str, src: &LazyCategory<MorHandle>, tgt: &LazyCategory<MorHandle>, k: f64) -> FunctorMap<MorHandle, MorHandle> {
    let (o1, o2) = (star(tgt), star(tgt));
    FunctorMap::new(name, src.clone(), tgt.clone(), move |_| o1.clone(), move |m| MorHandle::new(o2.clone(), o2.clone(), Payload::Real(k * time(m))))
}

/// Transformation with the constant component `s`.
fn shift(name: &str, f: &FunctorMap<MorHandle, MorHandle>, g: &FunctorMap<MorHandle, MorHandle>, s: f64) -> NatTransMap<MorHandle, MorHandle> {
    let o = star(&f.target);
    NatTransMap::new(name, f.clone(), g.clone(), move |_| MorHandle::new(o.clone(), o.clone(), Payload::Real(s)))
}

fn monoids() -> (LazyCategory<MorHandle>, LazyCategory<MorHandle>, LazyCategory<MorHandle>) {
    (time_monoid("A", &TIMES), time_monoid("B", &TIMES), time_monoid("C", &TIMES))
}

#[test]
fn time_monoid_and_scalings_obey_the_laws() {
    let (a, b, _) = monoids();
    assert!(check_category_laws(&a, 1e-15).passed());
    for k in [0.0, 0.5, 2.0, -3.0] {
        let r = check_functor_laws(&scaling("F", &a, &b, k), 1e-15);
        assert!(r.passed() && r.instances_checked > 0);
    }
}

#[test]
fn vertical_composite_adds_components() {
    let (a, b, _) = monoids();
    let f = scaling("F", &a, &b, 2.0);
    let s = shift("s", &f, &f, 0.3);
    let t = shift("t", &f, &f, -1.1);
    let st = vcompose_nat(&s, &t).unwrap();
    assert!((time(&st.at(&star(&a))) - (0.3 - 1.1)).abs() < 1e-15);
    assert!(check_naturality(&st, 1e-15).passed());
    let u = shift("u", &f, &f, 0.7);
    let l = vcompose_nat(&vcompose_nat(&s, &t).unwrap(), &u).unwrap();
    let r = vcompose_nat(&s, &vcompose_nat(&t, &u).unwrap()).unwrap();
    assert!((time(&l.at(&star(&a))) - time(&r.at(&star(&a)))).abs() < 1e-15);
}

#[test]
fn vertical_composite_rejects_mismatched_functors() {
    let (a, b, _) = monoids();
    let (f, g) = (scaling("F", &a, &b, 2.0), scaling("G", &a, &b, 3.0));
    let s = shift("s", &f, &f, 0.3);
    let t = shift("t", &g, &g, 0.1);
    assert!(vcompose_nat(&s, &t).is_err());
}

#[test]
fn godement_product_by_hand() {
    // α: F⇒F over A → B and β: H⇒H over B → C, so (β∗α)(*) = b + h·a
    let (a, b, c) = monoids();
    let (fa, fb) = (0.4, -0.25);
    let f = scaling("F", &a, &b, 2.0);
    let h = scaling("H", &b, &c, 3.0);
    let alpha = shift("α", &f, &f, fa);
    let beta = shift("β", &h, &h, fb);
    let ba = hcompose_nat(&beta, &alpha).unwrap();
    assert!((time(&ba.at(&star(&a))) - (fb + 3.0 * fa)).abs() < 1e-15);
    assert!(check_naturality(&ba, 1e-14).passed());
    assert!(check_functor_laws(&ba.source, 1e-14).passed());
    assert!(hcompose_nat(&alpha, &alpha).is_err());
}

#[test]
fn whiskering_is_the_component_at_the_image() {
    let (a, b, c) = monoids();
    let f = scaling("F", &a, &b, -2.0);
    let h = scaling("H", &b, &c, 0.5);
    let beta = shift("β", &h, &h, 1.25);
    let w = whisker(&beta, &f).unwrap();
    for x in a.objects() {
        assert_eq!(w.at(x), beta.at(&f.obj(x)));
    }
    // on a poset, where components genuinely depend on the object
    let p = poset_category("P", 4);
    let idx = |o: &ObjHandle| match o.payload {
        Payload::Int(i) => i as usize,
        _ => unreachable!(),
    };
    let mono = |name: &str, tab: [usize; 4]| {
        let (o1, o2) = (p.objects().to_vec(), p.objects().to_vec());
        FunctorMap::new(name, p.clone(), p.clone(), move |x| o1[tab[idx(x)]].clone(), move |m| {
            MorHandle::new(o2[tab[idx(&m.dom)]].clone(), o2[tab[idx(&m.cod)]].clone(), Payload::None)
        })
    };
    let f = mono("F", [0, 0, 2, 3]);
    let (hh, kk) = (mono("H", [0, 1, 1, 2]), mono("K", [1, 2, 3, 3]));
    let (h1, k1) = (hh.clone(), kk.clone());
    let beta = NatTransMap::new("β", hh, kk, move |x| MorHandle::new(h1.obj(x), k1.obj(x), Payload::None));
    assert!(check_naturality(&beta, 0.0).passed());
    let w = whisker(&beta, &f).unwrap();
    for x in p.objects() {
        assert_eq!(w.at(x), beta.at(&f.obj(x)), "at {}", x.id);
    }
    assert!(check_naturality(&w, 0.0).passed());
    let ii = hcompose_nat(&NatTransMap::identity(&beta.source), &NatTransMap::identity(&f)).unwrap();
    let hf = compose_functors(&beta.source, &f).unwrap();
    for x in p.objects() {
        assert_eq!(ii.at(x), p.identity(&hf.obj(x)));
    }
}

#[test]
fn interchange_by_hand() {
    let (a, b, c) = monoids();
    let f = scaling("F", &a, &b, 2.0);
    let g = scaling("G", &b, &c, -0.5);
    let (alpha, gamma) = (shift("α", &f, &f, 0.3), shift("γ", &f, &f, -0.7));
    let (beta, delta) = (shift("β", &g, &g, 1.1), shift("δ", &g, &g, 0.2));
    let r = check_interchange(&delta, &gamma, &beta, &alpha, 1e-15).unwrap();
    assert!(r.passed() && r.instances_checked == 1);
    // both sides equal d + b + g·(c + a)
    let lhs = vcompose_nat(&hcompose_nat(&delta, &gamma).unwrap(), &hcompose_nat(&beta, &alpha).unwrap()).unwrap();
    assert!((time(&lhs.at(&star(&a))) - (0.2 + 1.1 - 0.5 * (-0.7 + 0.3))).abs() < 1e-15);
}

#[test]
fn corrupted_naturality_is_located() {
    // a shift claimed to go from t ↦ t to t ↦ 2t fails on every nonzero time
    let (a, b, _) = monoids();
    let (f, g) = (scaling("F", &a, &b, 1.0), scaling("G", &a, &b, 2.0));
    let bad = shift("bad", &f, &g, 0.4);
    let r = check_naturality(&bad, 1e-12);
    assert!(!r.passed());
    let nonzero = TIMES.iter().filter(|t| **t != 0.0).count();
    assert_eq!(r.violations.len(), nonzero);
    for v in &r.violations {
        assert_eq!(v.objects.len(), 2);
        assert_eq!(v.morphisms.len(), 1);
        assert!(v.delta > 0.0);
    }
    assert!((r.max_delta - 1.5).abs() < 1e-15);
}

#[test]
fn composite_functor_across_three_categories() {
    let (a, b, c) = monoids();
    let f = scaling("F", &a, &b, 2.0);
    let g = scaling("G", &b, &c, -0.5);
    let gf = compose_functors(&g, &f).unwrap();
    assert!(functors_agree(&gf, &scaling("-1", &a, &c, -1.0), 1e-15));
    assert!(check_functor_laws(&gf, 1e-15).passed());
    assert!(compose_functors(&f, &g).is_err());
}
