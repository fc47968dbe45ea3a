use std::time::Instant;

use dynspecies::category::SamplerConfig;
use dynspecies::cosmo::{RwFixture, RwToyConfig, ScaleFunction};
use dynspecies::suites::*;
use dynspecies::LawReport;

fn show(name: &str, start: Instant, r: &LawReport) {
    eprintln!(
        "{name:<28} pass={} n={} max={:.3e} viol={} na={:?} {:.2}s",
        r.passed(),
        r.instances_checked,
        r.max_delta,
        r.violations.len(),
        r.not_applicable,
        start.elapsed().as_secs_f64()
    );
}

macro_rules! run {
    ($name:expr, $e:expr) => {{
        let t = Instant::now();
        let r: LawReport = $e;
        show($name, t, &r);
        r
    }};
}

#[test]
fn matrix_suites_and_faults() {
    let cfg = MatrixConfig::default();
    let fx = matrix_fixture(&cfg, 7, 1e-12).unwrap();
    let tol = 1e-12;
    for fault in [false, true] {
        let rs = [
            run!("dp associativity", dp_associativity(&fx, tol, fault).unwrap()),
            run!("dp unitality", dp_unitality(&fx, tol, fault).unwrap()),
            run!("chdv unit", chdv_unit_neutrality(&fx, tol, fault).unwrap()),
            run!("interchange", interchange_suite(&fx, &cfg, 600, tol, fault).unwrap()),
            run!("psi", psi_suite(&fx, tol, fault)),
            run!("dagger", dagger_suite(&fx, 600, tol, fault).unwrap()),
            run!("propensity", propensity_suite(7, 1e-12, fault).unwrap()),
            run!("interference", interference_suite(7, 1e-12, fault).unwrap()),
            run!("spectral", spectral_suite(7, 1e-10, fault).unwrap()),
            run!("mean value", mean_value_suite(7, fault).unwrap()),
        ];
        for r in &rs {
            if fault {
                assert!(fault_located(r), "{}", r.law);
            } else {
                assert!(r.passed(), "{} {:?}", r.law, r.violations.first());
            }
        }
    }
}

#[test]
fn flow_suites_and_faults() {
    let scfg = SamplerConfig::default();
    for (name, ctx) in [("line", line_contexts().unwrap()), ("plane", plane_contexts().unwrap())] {
        eprintln!("-- {name}");
        for fault in [false, true] {
            let mut rs = vec![
                run!("flow naturality", flow_naturality_suite(&ctx, 1e-9, fault)),
                run!("flow functor", flow_functor_suite(&ctx, 1e-9, fault)),
                run!("species", species_suite(&ctx, scfg, 1e-9, fault)),
                run!("bracket", bracket_suite(&ctx, 1e-4, 1e-5, fault).unwrap()),
            ];
            if !fault {
                rs.push(run!("flow cat laws", flow_category_laws(&ctx, scfg, 1e-9)));
            }
            for r in &rs {
                if fault {
                    assert!(fault_located(r), "{}", r.law);
                } else {
                    assert!(r.passed(), "{} {:?}", r.law, r.violations.first());
                }
            }
        }
    }
}

#[test]
fn species_level_suites_and_faults() {
    let scfg = SamplerConfig::default();
    let ctx = line_contexts().unwrap();
    let a = ctx.species(scfg, 1e-9);
    let id = dynspecies::species::Connector::identity(&a);
    let toy = exact_toy_connector(&ctx, &a, 1e-9).unwrap();
    for fault in [false, true] {
        let rs = [
            run!("setting", setting_suite(&a, 1e-9, fault)),
            run!("equiformity id", equiformity_suite(&id, 1e-9, fault).unwrap()),
            run!("equiformity toy", equiformity_suite(&toy, 1e-9, fault).unwrap()),
            run!("charge", charge_suite(&id, 1e-9, fault).unwrap()),
            run!("charge toy", charge_suite(&toy, 1e-9, fault).unwrap()),
            run!("charge compose", charge_compose_suite(&toy, &id, 1e-9, fault).unwrap()),
            run!("charge transfer", charge_transfer_suite(&ctx, &a, &toy, 1e-9, fault).unwrap()),
        ];
        for r in &rs {
            if fault {
                assert!(fault_located(r), "{}", r.law);
            } else {
                assert!(r.passed(), "{} {:?}", r.law, r.violations.first());
            }
        }
    }
}

#[test]
fn cosmology_suites_and_faults() {
    let cfg = RwToyConfig::new(ScaleFunction::exponential(0.5), (0.2, 3.0));
    let t = Instant::now();
    let fx = RwFixture::build(cfg, SamplerConfig::default(), 1e-9).unwrap();
    let f = fx.factors(0, 1.0).unwrap();
    eprintln!("fixture {:.2}s", t.elapsed().as_secs_f64());
    let scale = fx.rw.scale.clone();
    let ok = [
        run!("hubble", hubble_suite(&f, &scale, 1e-5)),
        run!("accel", acceleration_suite(&f, &scale, 1e-4)),
        run!("positivity", positivity_suite(&f, &scale)),
        run!("rk4", rk4_order_suite(&rk4_cases().unwrap(), 0.1, 10, 0.3)),
        run!("geodesic rel", geodesic_relatedness_suite(&fx, 1e-6, false).unwrap()),
    ];
    for r in &ok {
        assert!(r.passed(), "{} {:?}", r.law, r.violations.first());
    }
    let bad = [
        run!("hubble bad", hubble_suite(&f, &perturbed_scale(&scale), 1e-5)),
        run!("accel bad", acceleration_suite(&f, &perturbed_scale(&scale), 1e-4)),
        run!("positivity bad", positivity_suite(&f, &flipped_scale(&scale, 1.0))),
        run!("rk4 kink", rk4_order_suite(&[rk4_kinked_case().unwrap()], 0.1, 10, 0.3)),
        run!("geodesic bad", geodesic_relatedness_suite(&fx, 1e-6, true).unwrap()),
    ];
    for r in &bad {
        assert!(fault_located(r), "{}", r.law);
    }
}
