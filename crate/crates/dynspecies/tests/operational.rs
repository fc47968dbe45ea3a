use dynspecies::algebra::element::{hermitian_eigenvalues, hermitian_spectrum};
use dynspecies::algebra::{c, spectral_measure, AlgebraElement, CMat, Functional, StarAlgebra};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `U† diag(ev) U` with a random unitary `U`.
fn with_spectrum(ev: &[f64], rng: &mut ChaCha8Rng) -> CMat {
    let d = ev.len();
    let g = CMat::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let u = ((&g + g.adjoint()) * c(0.0, -1.0)).exp();
    u.adjoint() * CMat::from_diagonal(&DVector::from_iterator(d, ev.iter().map(|&x| c(x, 0.0)))) * u
}

#[test]
fn degenerate_spectra_are_resolved() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let o = with_spectrum(&[a, a, b], &mut rng);
        let mut want = vec![a, a, b];
        want.sort_by(f64::total_cmp);
        for (x, y) in hermitian_eigenvalues(&o).iter().zip(&want) {
            assert!((x - y).abs() < 1e-10);
        }
        let mut rebuilt = CMat::zeros(3, 3);
        let mut total = CMat::zeros(3, 3);
        for (l, p) in hermitian_spectrum(&o, 1e-9) {
            assert!((&p * &p - &p).norm() < 1e-10, "not a projection");
            rebuilt += &p * c(l, 0.0);
            total += p;
        }
        assert!((rebuilt - &o).norm() < 1e-10);
        assert!((total - CMat::identity(3, 3)).norm() < 1e-10);
    }
}

#[test]
fn spectral_measure_masses_follow_multiplicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alg = StarAlgebra::matrix_algebra("M4", 4, 1e-12).unwrap();
    let o = with_spectrum(&[1.0, 1.0, 1.0, -2.0], &mut rng);
    // the tracial state weighs each eigenvalue by multiplicity / d
    let tau = Functional::density(CMat::identity(4, 4) * c(0.25, 0.0)).unwrap();
    let nu = spectral_measure(&alg, &tau, &AlgebraElement::Mat(o)).unwrap();
    assert_eq!(nu.len(), 2);
    assert!((nu[0].0 + 2.0).abs() < 1e-10 && (nu[0].1 - 0.25).abs() < 1e-10);
    assert!((nu[1].0 - 1.0).abs() < 1e-10 && (nu[1].1 - 0.75).abs() < 1e-10);
}
