//! One line per acceptance criterion, then the total wall clock. Runs without
//! the libtest harness so the lines always reach stdout; exits 1 on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dynspecies::category::SamplerConfig;
use dynspecies::cosmo::{branch_counts, RwFixture, RwToyConfig, ScaleFunction, HUBBLE_CONSTANT};
use dynspecies::flow::FlowContexts;
use dynspecies::species::{Connector, Species};
use dynspecies::suites::*;
use dynspecies::LawReport;

const MATRIX_TOL: f64 = 1e-12;
const FLOW_TOL: f64 = 1e-9;
const LAW_MIN_INSTANCES: usize = 500;
const SAMPLED_INSTANCES: usize = 600;

const PROPENSITY_MIN_TRIPLES: usize = 1000;
const INTERFERENCE_TOL: f64 = 1e-12;
const SPECTRAL_TOL: f64 = 1e-10;

const BRACKET_H: f64 = 1e-4;
const BRACKET_TOL: f64 = 1e-5;

const EQUIFORMITY_MIN_TUPLES: usize = 200;
const EQUIFORMITY_EXACT_TOL: f64 = 1e-9;
const EQUIFORMITY_RK4_TOL: f64 = 1e-6;

const HUBBLE_REL_TOL: f64 = 1e-5;
const ACCEL_REL_TOL: f64 = 1e-4;
const RK4_H: f64 = 0.1;
const RK4_STEPS: usize = 10;
const RK4_ORDER_BAND: f64 = 0.3;
const GEODESIC_TOL: f64 = 1e-6;
const H0_PUBLISHED: (f64, f64) = (73.02, 1.79);

const SEED: u64 = 7;

const BUDGETS: [f64; 7] = [10.0, 5.0, 10.0, 15.0, 10.0, 20.0, 60.0];
const TOTAL_BUDGET: f64 = 60.0;

struct Outcome {
    pass: bool,
    detail: String,
}

struct Tally {
    pass: bool,
    parts: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { pass: true, parts: Vec::new() }
    }

    /// Zero violations and at least `min` instances.
    fn law(&mut self, name: &str, r: &LawReport, min: usize) {
        let ok = r.passed() && r.instances_checked >= min;
        self.pass &= ok;
        self.parts.push(format!("{name} n={} max={:.1e}{}", r.instances_checked, r.max_delta, if ok { "" } else { " FAIL" }));
    }

    /// A corrupted instance with at least one located violation.
    fn fault(&mut self, name: &str, r: &LawReport) {
        let ok = fault_located(r);
        self.pass &= ok;
        if !ok {
            self.parts.push(format!("{name} undetected"));
        }
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.pass &= ok;
        self.parts.push(format!("{name}{}", if ok { "" } else { " FAIL" }));
    }

    fn done(self) -> Outcome {
        Outcome { pass: self.pass, detail: self.parts.join("; ") }
    }
}

struct Shared {
    line: FlowContexts,
    plane: FlowContexts,
    species: Species,
    identity: Connector,
    toy: Connector,
    desitter: Option<RwFixture>,
}

fn rw_fixture(scale: ScaleFunction) -> RwFixture {
    RwFixture::build(RwToyConfig::new(scale, (0.2, 3.0)), SamplerConfig::default(), FLOW_TOL).expect("cosmology fixture")
}

fn laws() -> Outcome {
    let cfg = MatrixConfig::default();
    let fx = matrix_fixture(&cfg, SEED, MATRIX_TOL).expect("matrix fixture");
    let mut t = Tally::new();
    t.law("dp-assoc", &dp_associativity(&fx, MATRIX_TOL, false).unwrap(), LAW_MIN_INSTANCES);
    t.law("dp-unit", &dp_unitality(&fx, MATRIX_TOL, false).unwrap(), LAW_MIN_INSTANCES);
    t.law("chdv-unit", &chdv_unit_neutrality(&fx, MATRIX_TOL, false).unwrap(), LAW_MIN_INSTANCES);
    t.law("interchange", &interchange_suite(&fx, &cfg, SAMPLED_INSTANCES, MATRIX_TOL, false).unwrap(), LAW_MIN_INSTANCES);
    t.law("psi", &psi_suite(&fx, MATRIX_TOL, false), LAW_MIN_INSTANCES);
    t.law("dagger", &dagger_suite(&fx, SAMPLED_INSTANCES, MATRIX_TOL, false).unwrap(), LAW_MIN_INSTANCES);
    let scfg = SamplerConfig::default();
    let flow = LawReport::merged(
        "flow category laws",
        [flow_category_laws(&line_contexts().unwrap(), scfg, FLOW_TOL), flow_category_laws(&plane_contexts().unwrap(), scfg, FLOW_TOL)],
    );
    t.law("flow-cat", &flow, LAW_MIN_INSTANCES);
    t.done()
}

fn operational() -> Outcome {
    let mut t = Tally::new();
    t.law("propensity", &propensity_suite(SEED, MATRIX_TOL, false).unwrap(), PROPENSITY_MIN_TRIPLES);
    // the suite itself asserts a nonzero defect on the Hadamard instance
    t.law("interference", &interference_suite(SEED, INTERFERENCE_TOL, false).unwrap(), 1);
    t.law("spectral", &spectral_suite(SEED, SPECTRAL_TOL, false).unwrap(), 1);
    let mv = mean_value_suite(SEED, false).unwrap();
    t.law("mean-value", &mv, 1);
    t.flag("mean-value exact", mv.max_delta == 0.0);
    t.done()
}

fn flow_species(sh: &Shared) -> Outcome {
    let mut t = Tally::new();
    for (name, ctx) in [("R1", &sh.line), ("R2", &sh.plane)] {
        t.law(&format!("{name} naturality"), &flow_naturality_suite(ctx, FLOW_TOL, false), 1);
        t.law(&format!("{name} flow-functor"), &flow_functor_suite(ctx, FLOW_TOL, false), 1);
        t.law(&format!("{name} species"), &species_suite(ctx, SamplerConfig::default(), FLOW_TOL, false), 1);
        t.law(&format!("{name} bracket"), &bracket_suite(ctx, BRACKET_H, BRACKET_TOL, false).unwrap(), 1);
    }
    t.done()
}

fn equiformity(sh: &mut Shared) -> Outcome {
    let mut t = Tally::new();
    t.law("identity", &equiformity_suite(&sh.identity, EQUIFORMITY_EXACT_TOL, false).unwrap(), EQUIFORMITY_MIN_TUPLES);
    t.law("toy", &equiformity_suite(&sh.toy, EQUIFORMITY_EXACT_TOL, false).unwrap(), EQUIFORMITY_MIN_TUPLES);
    let fx = rw_fixture(ScaleFunction::exponential(0.5));
    t.law("toy-rk4", &equiformity_suite(&fx.connector, EQUIFORMITY_RK4_TOL, false).unwrap(), EQUIFORMITY_MIN_TUPLES);
    sh.desitter = Some(fx);
    t.done()
}

fn charge(sh: &Shared) -> Outcome {
    let mut t = Tally::new();
    t.law("setting", &setting_suite(&sh.species, FLOW_TOL, false), 1);
    t.law("charge-id", &charge_suite(&sh.identity, FLOW_TOL, false).unwrap(), 1);
    t.law("charge-toy", &charge_suite(&sh.toy, FLOW_TOL, false).unwrap(), 1);
    t.law("compose", &charge_compose_suite(&sh.toy, &sh.identity, FLOW_TOL, false).unwrap(), 1);
    t.law("transfer", &charge_transfer_suite(&sh.line, &sh.species, &sh.toy, FLOW_TOL, false).unwrap(), 1);
    t.done()
}

fn cosmology(sh: &mut Shared) -> Outcome {
    let mut t = Tally::new();
    let desitter = sh.desitter.take().unwrap_or_else(|| rw_fixture(ScaleFunction::exponential(0.5)));
    let fixtures = [
        ("exp", desitter),
        ("t^2/3", rw_fixture(ScaleFunction::power(2.0 / 3.0))),
        ("gauss", rw_fixture(ScaleFunction::gaussian(0.3))),
    ];
    for (name, fx) in &fixtures {
        let f = fx.factors(0, 1.0).unwrap();
        let scale = &fx.rw.scale;
        t.law(&format!("{name} hubble"), &hubble_suite(&f, scale, HUBBLE_REL_TOL), 1);
        t.law(&format!("{name} accel"), &acceleration_suite(&f, scale, ACCEL_REL_TOL), 1);
        t.law(&format!("{name} positivity"), &positivity_suite(&f, scale), 1);
        t.law(&format!("{name} geodesic"), &geodesic_relatedness_suite(fx, GEODESIC_TOL, false).unwrap(), 1);
    }
    let gauss = fixtures[2].1.factors(0, 1.0).unwrap().series(&fixtures[2].1.rw.scale);
    t.flag("complex branch", branch_counts(&gauss).0 > 0);
    t.law("rk4 order", &rk4_order_suite(&rk4_cases().unwrap(), RK4_H, RK4_STEPS, RK4_ORDER_BAND), 2);
    t.flag("H0 73.02±1.79", HUBBLE_CONSTANT == H0_PUBLISHED);
    sh.desitter = Some(fixtures.into_iter().next().unwrap().1);
    t.done()
}

fn faults(sh: &Shared) -> Outcome {
    let mut t = Tally::new();
    let mut count = 0usize;
    let mut check = |t: &mut Tally, name: &str, r: LawReport| {
        count += 1;
        t.fault(name, &r);
    };
    let cfg = MatrixConfig::default();
    let fx = matrix_fixture(&cfg, SEED, MATRIX_TOL).unwrap();
    check(&mut t, "dp-assoc", dp_associativity(&fx, MATRIX_TOL, true).unwrap());
    check(&mut t, "dp-unit", dp_unitality(&fx, MATRIX_TOL, true).unwrap());
    check(&mut t, "chdv-unit", chdv_unit_neutrality(&fx, MATRIX_TOL, true).unwrap());
    check(&mut t, "interchange", interchange_suite(&fx, &cfg, SAMPLED_INSTANCES, MATRIX_TOL, true).unwrap());
    check(&mut t, "psi", psi_suite(&fx, MATRIX_TOL, true));
    check(&mut t, "dagger", dagger_suite(&fx, SAMPLED_INSTANCES, MATRIX_TOL, true).unwrap());
    check(&mut t, "propensity", propensity_suite(SEED, MATRIX_TOL, true).unwrap());
    check(&mut t, "interference", interference_suite(SEED, INTERFERENCE_TOL, true).unwrap());
    check(&mut t, "spectral", spectral_suite(SEED, SPECTRAL_TOL, true).unwrap());
    check(&mut t, "mean-value", mean_value_suite(SEED, true).unwrap());
    for ctx in [&sh.line, &sh.plane] {
        check(&mut t, "naturality", flow_naturality_suite(ctx, FLOW_TOL, true));
        check(&mut t, "flow-functor", flow_functor_suite(ctx, FLOW_TOL, true));
        check(&mut t, "species", species_suite(ctx, SamplerConfig::default(), FLOW_TOL, true));
        check(&mut t, "bracket", bracket_suite(ctx, BRACKET_H, BRACKET_TOL, true).unwrap());
    }
    check(&mut t, "setting", setting_suite(&sh.species, FLOW_TOL, true));
    check(&mut t, "equiformity-id", equiformity_suite(&sh.identity, EQUIFORMITY_EXACT_TOL, true).unwrap());
    check(&mut t, "equiformity-toy", equiformity_suite(&sh.toy, EQUIFORMITY_EXACT_TOL, true).unwrap());
    check(&mut t, "charge", charge_suite(&sh.toy, FLOW_TOL, true).unwrap());
    check(&mut t, "charge-compose", charge_compose_suite(&sh.toy, &sh.identity, FLOW_TOL, true).unwrap());
    check(&mut t, "charge-transfer", charge_transfer_suite(&sh.line, &sh.species, &sh.toy, FLOW_TOL, true).unwrap());
    let rw = sh.desitter.as_ref().expect("built by the cosmology criterion");
    check(&mut t, "equiformity-rk4", equiformity_suite(&rw.connector, EQUIFORMITY_RK4_TOL, true).unwrap());
    let f = rw.factors(0, 1.0).unwrap();
    let scale = &rw.rw.scale;
    check(&mut t, "hubble", hubble_suite(&f, &perturbed_scale(scale), HUBBLE_REL_TOL));
    check(&mut t, "accel", acceleration_suite(&f, &perturbed_scale(scale), ACCEL_REL_TOL));
    check(&mut t, "positivity", positivity_suite(&f, &flipped_scale(scale, 1.0)));
    check(&mut t, "rk4 order", rk4_order_suite(&[rk4_kinked_case().unwrap()], RK4_H, RK4_STEPS, RK4_ORDER_BAND));
    check(&mut t, "geodesic", geodesic_relatedness_suite(rw, GEODESIC_TOL, true).unwrap());
    t.parts.insert(0, format!("{count} corrupted checkers located"));
    t.done()
}

fn main() -> ExitCode {
    let start = Instant::now();
    let line = line_contexts().unwrap();
    let species = line.species(SamplerConfig::default(), FLOW_TOL);
    let identity = Connector::identity(&species);
    let toy = exact_toy_connector(&line, &species, FLOW_TOL).unwrap();
    let mut sh = Shared { plane: plane_contexts().unwrap(), line, species, identity, toy, desitter: None };
    let setup = start.elapsed();

    let mut lines = Vec::new();
    let mut all = true;
    let mut record = |k: usize, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = run();
        let el = t.elapsed();
        let ok = o.pass && el < Duration::from_secs_f64(BUDGETS[k - 1]);
        all &= ok;
        lines.push(format!(
            "[{}] criterion {k} {name:<14} {:>6.2}s (budget {:>4.0}s) {}",
            if ok { "PASS" } else { "FAIL" },
            el.as_secs_f64(),
            BUDGETS[k - 1],
            o.detail
        ));
    };
    record(1, "laws", &mut laws);
    record(2, "operational", &mut operational);
    record(3, "flow-species", &mut || flow_species(&sh));
    record(4, "equiformity", &mut || equiformity(&mut sh));
    record(5, "charge", &mut || charge(&sh));
    record(6, "cosmology", &mut || cosmology(&mut sh));
    record(7, "fault-inject", &mut || faults(&sh));
    let total = start.elapsed().as_secs_f64();
    let total_ok = total < TOTAL_BUDGET;
    for l in &lines {
        println!("{l}");
    }
    println!(
        "[{}] full suite {total:.2}s (budget {TOTAL_BUDGET:.0}s, shared setup {:.2}s)",
        if total_ok { "PASS" } else { "FAIL" },
        setup.as_secs_f64()
    );
    if all && total_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
