use dynspecies::algebra::element::random_density;
use dynspecies::algebra::*;
use dynspecies::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn m2() -> StarAlgebra {
    StarAlgebra::matrix_algebra("M2", 2, 1e-12).unwrap()
}

fn unit_of(e: &[(usize, usize)], scale: f64) -> CMat {
    let mut m = CMat::zeros(2, 2);
    for &(i, j) in e {
        m[(i, j)] = c(scale, 0.0);
    }
    m
}

fn mat(m: CMat) -> AlgebraElement {
    AlgebraElement::Mat(m)
}

fn density(entries: &[f64]) -> Functional {
    let d = (entries.len() as f64).sqrt() as usize;
    Functional::density(CMat::from_fn(d, d, |i, j| c(entries[i * d + j], 0.0))).unwrap()
}

#[test]
fn propensity_of_identity_channel() {
    let a = m2();
    let id = Channel::identity(&a);
    let rho = density(&[0.3, 0.1, 0.1, 0.5]);
    assert_eq!(propensity(&id, &rho, &a.unit()).unwrap(), 1.0);
    assert_eq!(propensity(&id, &rho, &a.zero()).unwrap(), 0.0);
}

#[test]
fn propensity_through_a_projection_by_hand() {
    // tr(diag(.5,.5) · p* 1 p) with p = diag(1,0)
    let a = m2();
    let j = dagger(&delta(&a, &AlgebraElement::real_diag(&[1.0, 0.0])));
    let rho = density(&[0.5, 0.0, 0.0, 0.5]);
    assert!((propensity(&j, &rho, &a.unit()).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn propensity_domain_errors() {
    let a = m2();
    let j = Channel::identity(&a);
    let zero = Functional::Mat(CMat::zeros(2, 2));
    assert!(matches!(propensity(&j, &zero, &a.unit()), Err(Error::ZeroStrength)));
    let rho = density(&[0.5, 0.0, 0.0, 0.5]);
    assert!(matches!(propensity(&j, &rho, &a.unit().scale(c(2.0, 0.0))), Err(Error::Precondition(_))));
}

#[test]
fn effects() {
    let a = m2();
    assert!(is_effect(&a, &a.unit(), 1e-12));
    assert!(!is_effect(&a, &a.unit().scale(c(2.0, 0.0)), 1e-12));
    assert!(is_effect(&a, &AlgebraElement::real_diag(&[1.0, 0.0]), 1e-12));
    assert!(!is_effect(&a, &AlgebraElement::real_diag(&[1.0, -0.1]), 1e-12));
}

#[test]
fn delta_examples() {
    let a = m2();
    let x = mat(CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 0.3), c(0.2, -0.7)]));
    assert!(a.equal(&delta(&a, &a.unit()).apply(&x).unwrap(), &x));
    let p = AlgebraElement::real_diag(&[1.0, 0.0]);
    assert_eq!(delta(&a, &p).apply(&a.unit()).unwrap().as_mat().unwrap(), &unit_of(&[(0, 0)], 1.0));
    // δ(u) for a unitary u is multiplicative
    let u = mat(CMat::from_row_slice(2, 2, &[c(S, 0.0), c(0.0, S), c(0.0, S), c(S, 0.0)]));
    let du = delta(&a, &u);
    let y = mat(CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(2.0, 0.0), c(0.0, 0.0), c(-1.0, 1.0)]));
    let lhs = du.apply(&x.mul(&y).unwrap()).unwrap();
    let rhs = du.apply(&x).unwrap().mul(&du.apply(&y).unwrap()).unwrap();
    assert!(a.distance(&lhs, &rhs) < 1e-14);
}

fn random_mat(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    use rand::Rng;
    CMat::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn delta_is_an_anti_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = StarAlgebra::matrix_algebra("M3", 3, 1e-12).unwrap();
    for _ in 0..50 {
        let (p, q, x) = (mat(random_mat(3, &mut rng)), mat(random_mat(3, &mut rng)), mat(random_mat(3, &mut rng)));
        let lhs = delta(&a, &p.mul(&q).unwrap()).apply(&x).unwrap();
        let rhs = delta(&a, &q).apply(&delta(&a, &p).apply(&x).unwrap()).unwrap();
        assert!(a.distance(&lhs, &rhs) < 1e-12);
    }
}

#[test]
fn dagger_examples() {
    let a = m2();
    let rho = density(&[0.7, 0.2, 0.2, 0.3]);
    let id = dagger(&PositiveMap::identity(&a));
    assert!(id.apply(&rho).unwrap().distance(&rho, &a) < 1e-15);
    // γ†_x scales the strength by ω(x*x)/ω(1)
    let x = mat(unit_of(&[(0, 0), (0, 1)], 0.5));
    let g = dagger(&delta(&a, &x));
    assert!(g.is_channel());
    let want = rho.apply(&x.adjoint().mul(&x).unwrap()).unwrap().re;
    let got = g.apply(&rho).unwrap().strength();
    assert!((got - want).abs() < 1e-15 && got <= rho.strength());
}

#[test]
fn dagger_is_contravariant_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let a = StarAlgebra::matrix_algebra("M3", 3, 1e-12).unwrap();
    for _ in 0..30 {
        let s = PositiveMap::kraus("S", &a, vec![random_mat(3, &mut rng) * c(0.4, 0.0)]);
        let t = PositiveMap::kraus("T", &a, vec![random_mat(3, &mut rng) * c(0.4, 0.0)]);
        let st = dagger(&s.compose(&t).unwrap());
        let ts = dagger(&t).compose(&dagger(&s)).unwrap();
        for phi in a.sample_functionals() {
            let (l, r) = (st.apply(phi).unwrap(), ts.apply(phi).unwrap());
            assert!(l.distance(&r, &a) < 1e-12);
        }
    }
}

#[test]
fn interference_commuting_case_has_no_defect() {
    let a = m2();
    let (x, y) = (mat(unit_of(&[(0, 0)], 0.5)), mat(unit_of(&[(1, 1)], 0.5)));
    let cc = AlgebraElement::real_diag(&[0.9, -0.4]);
    let i = interference_check(&a, &x, &y, &cc, &density(&[0.6, 0.1, 0.1, 0.4])).unwrap();
    assert!(i.defect.abs() < 1e-15 && i.residual() < 1e-12);
    assert!(i.precondition_failures.is_empty());
}

#[test]
fn interference_hadamard_by_hand() {
    // (a+b)*(a+b) is the all-halves matrix, so the through-propensity is 1;
    // the two paths give 1/4 each and the defect is 1/2
    let a = m2();
    let x = mat(unit_of(&[(0, 0)], S));
    let y = mat(unit_of(&[(0, 1)], S));
    let h = mat(CMat::from_row_slice(2, 2, &[c(S, 0.0), c(S, 0.0), c(S, 0.0), c(-S, 0.0)]));
    let plus = density(&[0.5, 0.5, 0.5, 0.5]);
    let i = interference_check(&a, &x, &y, &h, &plus).unwrap();
    assert!((i.lhs - 1.0).abs() < 1e-15);
    assert!((i.parts[0] - 0.25).abs() < 1e-15 && (i.parts[1] - 0.25).abs() < 1e-15);
    assert!((i.defect - 0.5).abs() < 1e-15);
    assert!(i.residual() < 1e-12);
}

#[test]
fn interference_disjoint_functions_have_no_defect() {
    let probes: Vec<Point> = (0..11).map(|k| vec![k as f64 / 10.0]).collect();
    let alg = StarAlgebra::function_algebra("C[0,1]", 1, probes, None, 1e-12).unwrap();
    let bump = |lo: f64, hi: f64| AlgebraElement::func(FnExpr::custom(format!("1[{lo},{hi})"), move |p| c(if p[0] >= lo && p[0] < hi { 0.7 } else { 0.0 }, 0.0)));
    let (x, y) = (bump(0.0, 0.5), bump(0.5, 1.1));
    let cc = AlgebraElement::func(FnExpr::custom("e^{ix}", |p| c(0.0, p[0]).exp()));
    let omega = Functional::dirac_mix(vec![(vec![0.2], 0.5), (vec![0.8], 1.5), (vec![0.5], 1.0)]).unwrap();
    let i = interference_check(&alg, &x, &y, &cc, &omega).unwrap();
    assert_eq!(i.defect, 0.0);
    assert!(i.residual() < 1e-9);
}

#[test]
fn interference_reports_elements_outside_the_unit_ball() {
    let a = m2();
    let big = mat(unit_of(&[(0, 0)], 2.0));
    let i = interference_check(&a, &big, &a.zero(), &a.unit(), &density(&[0.5, 0.0, 0.0, 0.5])).unwrap();
    assert!(!i.precondition_failures.is_empty());
}

#[test]
fn spectral_examples_by_hand() {
    let a = m2();
    let rho = density(&[0.25, 0.0, 0.0, 0.75]);
    let nu = spectral_measure(&a, &rho, &a.unit()).unwrap();
    assert_eq!(nu.len(), 1);
    assert!((nu[0].0 - 1.0).abs() < 1e-12 && (nu[0].1 - 1.0).abs() < 1e-12);
    let o = AlgebraElement::real_diag(&[2.0, -1.0]);
    let nu = spectral_measure(&a, &rho, &o).unwrap();
    assert!((nu[0].0 + 1.0).abs() < 1e-12 && (nu[0].1 - 0.75).abs() < 1e-12);
    assert!((nu[1].0 - 2.0).abs() < 1e-12 && (nu[1].1 - 0.25).abs() < 1e-12);
    assert!((mean_value(&rho, &o).unwrap() + 0.25).abs() < 1e-15);
    assert_eq!(mean_value(&rho, &a.unit()).unwrap(), 1.0);
    assert_eq!(mean_value(&rho.scaled(3.0), &o).unwrap(), mean_value(&rho, &o).unwrap());
}

#[test]
fn spectral_measure_rejects_function_algebras() {
    let alg = StarAlgebra::function_algebra("C", 1, vec![vec![0.0]], None, 1e-12).unwrap();
    let r = spectral_measure(&alg, &Functional::dirac(vec![0.0]), &alg.unit());
    assert!(matches!(r, Err(Error::UnsupportedVariant(_))));
}

#[test]
fn matrix_and_dirac_literals_load_from_json() {
    let m: MatrixLiteral = serde_json::from_str("[[[1, 0], [0, -1]], [[0, 1], [2, 0]]]").unwrap();
    let cm = m.to_cmat().unwrap();
    assert_eq!(cm[(0, 1)], c(0.0, -1.0));
    assert_eq!(cm[(1, 0)], c(0.0, 1.0));
    assert_eq!(MatrixLiteral::from_cmat(&cm), m);
    let ragged: MatrixLiteral = serde_json::from_str("[[[1, 0]], []]").unwrap();
    assert!(ragged.to_cmat().is_err());
    let atoms: Vec<DiracAtom> = serde_json::from_str(r#"[{"point": [0.5], "weight": 2.0}, {"point": [1.0], "weight": 0.5}]"#).unwrap();
    assert_eq!(Functional::from_atoms(&atoms).unwrap().strength(), 2.5);
    let neg: Vec<DiracAtom> = serde_json::from_str(r#"[{"point": [0.5], "weight": -1.0}]"#).unwrap();
    assert!(Functional::from_atoms(&neg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Subunital Kraus maps send effects to effects and their duals never
    /// raise strength; propensities stay in [0, 1].
    #[test]
    fn subunital_maps_respect_effects(seed in any::<u64>(), w in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = StarAlgebra::matrix_algebra("M3", 3, 1e-12).unwrap();
        let k = random_mat(3, &mut rng);
        let top = dynspecies::algebra::element::hermitian_eigenvalues(&(k.adjoint() * &k)).into_iter().fold(0.0, f64::max);
        let t = PositiveMap::kraus("K", &a, vec![k * c((w / top).sqrt(), 0.0)]);
        let e = mat(random_density(3, 3, &mut rng, 1.0));
        prop_assert!(is_effect(&a, &e, 1e-12));
        prop_assert!(is_effect(&a, &t.apply(&e).unwrap(), 1e-10));
        let omega = Functional::Mat(random_density(3, 3, &mut rng, 2.0));
        let j = dagger(&t);
        prop_assert!(j.apply(&omega).unwrap().strength() <= omega.strength() + 1e-12);
        let p = propensity(&j, &omega, &e).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
        // dominance: the propensity never exceeds that of the normalized output
        let out = j.apply(&omega).unwrap();
        if out.strength() > 1e-9 {
            let q = out.apply(&e).unwrap().re / out.strength();
            prop_assert!(p <= q + 1e-12);
        }
    }
}
