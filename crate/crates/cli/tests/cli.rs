use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curvestat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn curvestat")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "curvestat {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn schema_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json")
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(schema_path()).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

fn write(dir: &Path, name: &str, doc: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec(doc).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn predict_reports_exact_lambda_and_moments() {
    let doc = json(&["predict", "--q", "2", "--n", "2"]);
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["command"], "predict");
    assert_eq!(doc["payload"]["lambda"], "4/1");
    let m = &doc["payload"]["moments"];
    assert_eq!(m[1]["falling"], "16/1");
    assert_eq!(m[1]["raw"], "20/1");

    let doc = json(&["predict", "--q", "3", "--n", "2"]);
    assert_eq!(doc["payload"]["lambda"], "9/2");
    assert_eq!(doc["payload"]["moments"][1]["falling"], "81/4");
}

#[test]
fn zero_moment_order_gives_header_only_csv() {
    let out = run(&["predict", "--q", "5", "--n", "0", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["predict", "--q", "1"][..],
        &["census", "--kind", "quartic", "--q", "3"],
        &["census", "--kind", "genus1", "--field", "4^1"],
        &["trace", "--g", "10", "--gmax", "5"],
        &["rmt", "--g", "1", "--q", "5", "--samples", "0", "--seed", "1"],
        &["rmt", "--g", "1", "--q", "5", "--samples", "10"],
        &["rmt", "--g", "1", "--q", "5", "--samples", "10", "--seed", "1", "--epsilon", "-0.1"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn unwritable_output_exits_three() {
    let out = run(&["predict", "--q", "2", "--out", "/nonexistent/dir/x.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/x.json"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let out = run(&["predict", "--q", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(doc["payload"]["lambda"], "4/1");
    assert!(doc["execution"]["workers"].as_u64().unwrap() >= 1);
}

#[test]
fn trace_single_genus() {
    let doc = json(&["trace", "--g", "2", "--gmax", "2", "--depth", "40"]);
    let rows = doc["payload"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["g"], 2);
    assert_eq!(rows[0]["stable_normalized"], "1/1");
    assert_eq!(rows[0]["weight_cutoff"], 3);
}

#[test]
fn census_genus1_total_mass_is_q() {
    let doc = json(&["census", "--kind", "genus1", "--q", "2", "--validate-orbits"]);
    let p = &doc["payload"];
    assert_eq!(p["total_mass"], "2/1");
    assert_eq!(p["candidates"], 32);
    assert_eq!(p["smooth_equations"], 16);
    assert_eq!(p["orbit_validation"]["consistent"], true);

    let doc = json(&["census", "--kind", "genus1", "--field", "3^1"]);
    assert_eq!(doc["payload"]["total_mass"], "3/1");
}

#[test]
fn rmt_output_is_identical_across_worker_counts() {
    let base = ["rmt", "--g", "2", "--q", "17", "--samples", "3000", "--seed", "7", "--no-constraints", "--no-timing"];
    let a = run(&[&base[..], &["--workers", "1"]].concat());
    let b = run(&[&base[..], &["--workers", "8"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(doc.get("execution").is_none());
    assert!(doc["parameters"].get("workers").is_none());
}

#[test]
fn rmt_positivity_accepts_everything_when_q_is_large() {
    // q = 4g^2 + 1 puts q + 1 - 2g sqrt(q) above zero.
    let doc = json(&["rmt", "--g", "2", "--q", "17", "--samples", "2000", "--seed", "3", "--positivity"]);
    assert_eq!(doc["payload"]["acceptance_rate"].as_f64(), Some(1.0));
    assert_eq!(doc["payload"]["no_accepted_samples"], false);
}

#[test]
fn rmt_unconstrained_mean_is_q_plus_one() {
    let doc = json(&["rmt", "--g", "1", "--q", "101", "--samples", "20000", "--seed", "11", "--no-constraints"]);
    let mean = doc["payload"]["falling_moments_decimal"][0].as_f64().unwrap();
    assert!((mean - 102.0).abs() < 0.5, "mean {mean}");
}

#[test]
fn report_of_identical_inputs_has_zero_gap_between() {
    let dir = tempfile::tempdir().unwrap();
    let census = json(&["census", "--kind", "genus1", "--q", "2"]);
    let a = write(dir.path(), "a.json", &census);
    let b = write(dir.path(), "b.json", &census);
    let doc = json(&["report", "--census", &a, "--rmt", &b]);
    let rows = doc["payload"]["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(r["gap_between"], "0/1");
        assert!(r["gap_first_decimal"].as_f64().unwrap().is_finite());
    }
    assert!(!doc["payload"]["limitations"].as_str().unwrap().is_empty());
}

#[test]
fn report_missing_file_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let census = json(&["census", "--kind", "genus1", "--q", "2"]);
    let a = write(dir.path(), "a.json", &census);
    let missing = dir.path().join("absent.json");
    let out = run(&["report", "--census", &a, "--rmt", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}

#[test]
fn report_rejects_mismatched_fields() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", &json(&["census", "--kind", "genus1", "--q", "2"]));
    let b = write(dir.path(), "b.json", &json(&["census", "--kind", "genus1", "--q", "3"]));
    let out = run(&["report", "--census", &a, "--rmt", &b]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_command_matches_the_schema() {
    let v = validator();
    let dir = tempfile::tempdir().unwrap();
    let census = json(&["census", "--kind", "genus2", "--q", "2", "--validate-orbits"]);
    let rmt = json(&["rmt", "--g", "2", "--q", "2", "--samples", "500", "--seed", "1", "--no-constraints"]);
    let c = write(dir.path(), "c.json", &census);
    let r = write(dir.path(), "r.json", &rmt);
    let docs = [
        json(&["predict", "--q", "4", "--g", "2"]),
        json(&["series", "--n", "3", "--depth", "10", "--q", "3"]),
        json(&["trace", "--g", "2", "--gmax", "6", "--K", "200", "--kprime-gmax", "60"]),
        json(&["rmt", "--g", "1", "--q", "5", "--samples", "200", "--seed", "2"]),
        json(&["rmt", "--g", "3", "--q", "7", "--samples", "200", "--seed", "2", "--method", "density", "--no-timing"]),
        json(&["census", "--kind", "genus1", "--field", "2^2"]),
        census,
        rmt,
        json(&["report", "--census", &c, "--rmt", &r]),
    ];
    for d in &docs {
        assert_valid(&v, d);
    }
}

#[test]
fn schema_rejects_malformed_envelopes() {
    let v = validator();
    let mut doc = json(&["predict", "--q", "2", "--n", "1"]);
    assert_valid(&v, &doc);
    doc["payload"]["lambda"] = Value::from(4.0);
    assert!(!v.is_valid(&doc));
    let mut doc = json(&["predict", "--q", "2", "--n", "1"]);
    doc["schema_version"] = Value::from("2");
    assert!(!v.is_valid(&doc));
}
