use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynspecies")).args(args).output().expect("binary runs")
}

fn run_scenario(path: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["--scenario", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("s.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn listing_names_the_key_checks() {
    let o = run(&["--list-checks"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ["equiformity", "charge-compose", "hubble-factorization"] {
        assert!(text.lines().any(|l| l.split('\t').next() == Some(id)), "{id} missing");
    }
}

#[test]
fn schema_enumerates_the_registered_checks() {
    let listed: Vec<String> = String::from_utf8(run(&["--list-checks"]).stdout).unwrap().lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(root().join("schema/scenario.schema.json")).unwrap()).unwrap();
    let ids: Vec<String> = schema["properties"]["checks"]["items"]["properties"]["id"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(ids, listed);
}

#[test]
fn laws_core_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&scenario("laws-core"), dir.path(), &["--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(dir.path());
    assert_eq!(r["scenario"], "laws-core");
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["pass"], true);
        assert!(c["paper_ref"].as_str().unwrap().len() > 3);
    }
}

#[test]
fn equiformity_flow_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&scenario("equiformity-flow"), dir.path(), &["--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    let checks = r["checks"].as_array().unwrap();
    let eq = checks.iter().find(|c| c["id"] == "equiformity-toy").unwrap();
    assert!(eq["instances"].as_u64().unwrap() >= 200);
    for c in checks {
        let bound = if c["id"] == "bracket-relatedness" { 1e-5 } else { 1e-9 };
        assert!(c["max_delta"].as_f64().unwrap() <= bound, "{}", c["id"]);
    }
}

#[test]
fn fault_scenario_exits_one_with_located_violations() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&scenario("fault-injection"), dir.path(), &["--no-timestamp"]);
    assert_eq!(o.status.code(), Some(1));
    for c in report(dir.path())["checks"].as_array().unwrap() {
        assert_eq!(c["pass"], false, "{}", c["id"]);
        let v = c["violations"].as_array().unwrap();
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| !x["objects"].as_array().unwrap().is_empty() || !x["morphisms"].as_array().unwrap().is_empty()));
        assert!(c["violations_total"].as_u64().unwrap() >= v.len() as u64);
    }
}

#[test]
fn reports_are_byte_identical_without_timestamp() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        run_scenario(&scenario("cosmology-desitter"), d.path(), &["--no-timestamp"]);
    }
    for f in ["report.json", "hubble.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    run_scenario(&scenario("cosmology-desitter"), c.path(), &[]);
    assert!(report(c.path())["timestamp"].is_u64());
    assert!(report(a.path()).get("timestamp").is_none());
}

#[test]
fn seed_flag_overrides_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&scenario("laws-core"), dir.path(), &["--no-timestamp", "--seed", "123"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(dir.path())["seed"], 123);
}

#[test]
fn hubble_csv_has_one_row_per_interior_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&scenario("cosmology-desitter"), dir.path(), &["--no-timestamp"]);
    let csv = std::fs::read_to_string(dir.path().join("hubble.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,t0,q_k,c_k,H_lhs,H_rhs,accel_formula,accel_analytic,verdict"));
    let rows: Vec<&str> = lines.collect();
    // 33 trajectory samples, two lost at each end to the five-point stencil
    assert_eq!(rows.len(), 33 - 4);
    assert!(rows.iter().all(|r| r.split(',').count() == 9 && r.ends_with("positive")));
}

#[test]
fn empty_scenario_writes_empty_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&scenario("empty"), dir.path(), &["--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(dir.path())["checks"].as_array().unwrap().len(), 0);
    assert_eq!(std::fs::read(dir.path().join("hubble.csv")).unwrap().len(), 0);
}

#[test]
fn tol_scale_tightens_every_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_scenario(&scenario("cosmology-matter"), dir.path(), &["--no-timestamp"]).status.code(), Some(0));
    let o = run_scenario(&scenario("cosmology-matter"), dir.path(), &["--no-timestamp", "--tol-scale", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(dir.path());
    let acc = r["checks"].as_array().unwrap().iter().find(|c| c["id"] == "acceleration").unwrap().clone();
    assert_eq!(acc["pass"], false);
}

fn config_error(body: &str, expect: &str) {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), body);
    let o = run_scenario(&p, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2), "{body}");
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(expect), "{err}");
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn config_errors_exit_two_with_diagnostics() {
    config_error("{\"name\": \"x\",\n \"checks\": [ {\"id\": \"equiformity\", } ]}", "line 2");
    config_error(r#"{"name": "x", "checks": [{"id": "no-such-check"}]}"#, "no-such-check");
    config_error(r#"{"name": "x", "chekcs": []}"#, "chekcs");
    config_error(r#"{"name": "x", "checks": [{"id": "mean-value-scale", "tol": -1}]}"#, "tol");
    config_error(r#"{"name": "x", "checks": [{"id": "equiformity"}]}"#, "flow");
    config_error(r#"{"name": "x", "checks": [{"id": "hubble-factorization"}]}"#, "cosmology");
    let dangling = r#"{"name": "x", "flow": {"objects": [{"label": "M", "field": {"kind": "translation", "data": [1.0]},
        "regions": [{"label": "A", "lo": [0], "hi": [1]}], "time_grid": {"step": 0.5, "count": 2}}],
        "morphisms": [{"label": "f", "src": "M", "dst": "Q", "affine": {"A": [[1]], "b": [0]}}]},
        "checks": [{"id": "flow-naturality"}]}"#;
    config_error(dangling, "unknown object \"Q\"");
    let bad_kind = r#"{"name": "x", "flow": {"objects": [{"label": "M", "field": {"kind": "swirl", "data": [1.0]},
        "regions": [], "time_grid": {"step": 0.5, "count": 2}}]}, "checks": [{"id": "flow-functor"}]}"#;
    config_error(bad_kind, "swirl");
}

#[test]
fn equiformity_needs_a_non_identity_morphism() {
    // a single region that no nonzero time maps into itself: only identities
    let body = r#"{"name": "x", "flow": {"objects": [{"label": "M", "field": {"kind": "translation", "data": [1.0]},
        "regions": [{"label": "A", "lo": [0], "hi": [1]}], "time_grid": {"step": 0.5, "count": 2}}]},
        "checks": [{"id": "equiformity"}]}"#;
    config_error(body, "non-identity");
}

#[test]
fn tol_scale_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&scenario("empty"), dir.path(), &["--tol-scale", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_scenario_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&dir.path().join("absent.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}
