use dynspecies::algebra::*;
use dynspecies::category::{time_monoid, FunctorMap, MorHandle};
use dynspecies::pattern::*;

/// Functions on the line, moved by `t ↦ f(· + v t)`.
fn drifting(label: &str, alg: &StarAlgebra, v: f64) -> DynamicalPattern {
    let g = time_monoid(&format!("G[{label}]"), &[0.0, 0.5, 1.0, -0.5]);
    let (a1, a2) = (alg.clone(), alg.clone());
    DynamicalPattern::new(label, g, move |_| a1.clone(), move |m: &MorHandle| {
        let t = m.payload.as_real().unwrap();
        PositiveMap::pullback(format!("+{}", v * t), &a2, &a2, PointMap::translation(&[v * t]))
    })
}

fn relabel(src: &DynamicalPattern, dst: &DynamicalPattern) -> CtxFunctor {
    let so = src.g().objects()[0].clone();
    let s2 = so.clone();
    FunctorMap::new("rel", dst.g().clone(), src.g().clone(), move |_| so.clone(), move |m: &MorHandle| {
        MorHandle::new(s2.clone(), s2.clone(), m.payload.clone())
    })
}

fn line() -> StarAlgebra {
    let probes: Vec<Point> = (-8..=8).map(|k| vec![k as f64 / 4.0]).collect();
    StarAlgebra::function_algebra("C(R)", 1, probes, None, 1e-12).unwrap()
}

fn shifted(p: &DynamicalPattern, q: &DynamicalPattern, alg: &StarAlgebra, theta: PointMap) -> DpMorphism {
    let a = alg.clone();
    DpMorphism::new("T", p, q, relabel(p, q), move |_| PositiveMap::pullback("T", &a, &a, theta.clone())).unwrap()
}

#[test]
fn drifting_patterns_are_patterns() {
    let a = line();
    assert!(check_pattern(&drifting("P", &a, 1.0), 1e-12).passed());
}

#[test]
fn psi_of_a_shift_moves_point_masses() {
    // the dual of f ↦ f(· + c) sends δ_p to δ_{p+c}
    let a = line();
    let (p, q) = (drifting("P", &a, 1.0), drifting("Q", &a, 1.0));
    let t = shifted(&p, &q, &a, PointMap::translation(&[0.75]));
    assert!(check_dp_morphism(&t, 1e-12).passed());
    let m = psi(&t);
    assert!(check_chdv_morphism(&m, 1e-12).passed());
    let x = q.g().objects()[0].clone();
    for pt in [-1.0, 0.0, 0.3, 2.0] {
        let out = m.channel(&x).apply(&Functional::dirac(vec![pt])).unwrap();
        assert!(out.distance(&Functional::dirac(vec![pt + 0.75]), &a) < 1e-15, "at {pt}");
    }
    assert!(m.device(&x).distance(&t.component(&x)) == 0.0);
}

#[test]
fn units_are_neutral() {
    let a = line();
    let (p, q) = (drifting("P", &a, 1.0), drifting("Q", &a, 1.0));
    let t = shifted(&p, &q, &a, PointMap::translation(&[-0.5]));
    let left = dp_compose(&DpMorphism::identity(&q), &t).unwrap();
    let right = dp_compose(&t, &DpMorphism::identity(&p)).unwrap();
    assert_eq!(dp_distance(&left, &t, 1e-12), 0.0);
    assert_eq!(dp_distance(&right, &t, 1e-12), 0.0);
    let m = psi(&t);
    let l = chdv_compose(&ChdvMorphism::unit(&q), &m).unwrap();
    let r = chdv_compose(&m, &ChdvMorphism::unit(&p)).unwrap();
    assert!(chdv_distance(&l, &m, 1e-12) < 1e-15);
    assert!(chdv_distance(&r, &m, 1e-12) < 1e-15);
}

#[test]
fn psi_preserves_composites_of_shifts() {
    let a = line();
    let (p, q, r) = (drifting("P", &a, 1.0), drifting("Q", &a, 1.0), drifting("R", &a, 1.0));
    let t = shifted(&p, &q, &a, PointMap::translation(&[0.25]));
    let s = shifted(&q, &r, &a, PointMap::translation(&[-1.0]));
    let st = dp_compose(&s, &t).unwrap();
    let lhs = psi(&st);
    let rhs = chdv_compose(&psi(&s), &psi(&t)).unwrap();
    assert!(chdv_distance(&lhs, &rhs, 1e-12) < 1e-12);
    assert!(dagger_contravariance_check(&s, &t, 1e-12).unwrap().passed());
}

#[test]
fn scaling_component_breaks_naturality_and_is_located() {
    // f ↦ f(2·) does not commute with drifting at unit speed
    let a = line();
    let (p, q) = (drifting("P", &a, 1.0), drifting("Q", &a, 1.0));
    let bad = shifted(&p, &q, &a, PointMap::affine(nalgebra::DMatrix::from_element(1, 1, 2.0), nalgebra::DVector::from_element(1, 0.0)));
    let r = check_dp_morphism(&bad, 1e-12);
    assert!(!r.passed());
    assert!(r.violations.iter().all(|v| !v.objects.is_empty() && !v.morphisms.is_empty()));
    // the zero time is the only square that commutes
    assert_eq!(r.violations.len(), 3);
}
