//! End-to-end runs of the compiled binary: the exit-code contract, byte
//! determinism of every artifact, and the simulate-then-diagnose handoff
//! through stored ensembles.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_problab")
}

/// Fresh working directory for one test, under the target tmp dir.
fn workspace(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, want: i32) {
    assert_eq!(
        out.status.code(),
        Some(want),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const GBM_SIM: &str = r#"{
  "schema": "problab/1",
  "name": "gbm-run",
  "seed": 11,
  "paths": 400,
  "steps": 32,
  "out": ".",
  "simulate": { "model": { "model": "gbm", "x0": 1.0, "mu": 0.05, "sigma": 0.2 } }
}"#;

const ANT_SIM: &str = r#"{
  "schema": "problab/1",
  "name": "ant-run",
  "seed": 11,
  "paths": 400,
  "steps": 32,
  "out": ".",
  "simulate": { "model": { "model": "anticipating" } }
}"#;

fn diag_config(name: &str, x_meta: &str, y_meta: &str, expect: &str) -> String {
    format!(
        r#"{{
  "schema": "problab/1",
  "name": "{name}",
  "seed": 11,
  "out": ".",
  "diagnose": {{
    "x": "{x_meta}#x",
    "y": "{y_meta}#y",
    "alphas": [
      {{ "label": "quarter", "t": 0.25, "mode": "temporal" }},
      {{ "label": "half", "t": 0.5, "mode": "temporal" }}
    ],
    "expect": "{expect}"
  }}
}}"#
    )
}

#[test]
fn exact_suite_passes_and_is_byte_deterministic() {
    let dir = workspace("exact-deterministic");
    let config = write(
        &dir,
        "exact.json",
        r#"{
  "schema": "problab/1",
  "name": "quick-exact",
  "seed": 5,
  "exact": {
    "families": 60,
    "coupling_trials": 12,
    "dual_trials": 12,
    "model_trials": 12,
    "mixture_trials": 6
  }
}"#,
    );
    let config = config.to_str().unwrap();
    for out_dir in ["first", "second"] {
        fs::create_dir(dir.join(out_dir)).unwrap();
        let out = run_in(&dir, &["exact", "--config", config, "--out", out_dir]);
        assert_code(&out, 0);
    }
    let a = fs::read(dir.join("first/quick-exact.exact.json")).unwrap();
    let b = fs::read(dir.join("second/quick-exact.exact.json")).unwrap();
    assert!(!a.is_empty() && a == b);
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["pass"], serde_json::Value::Bool(true));
}

#[test]
fn simulate_outputs_are_byte_deterministic() {
    let dir = workspace("simulate-deterministic");
    let config = write(&dir, "sim.json", GBM_SIM);
    let config = config.to_str().unwrap();
    for out_dir in ["first", "second"] {
        fs::create_dir(dir.join(out_dir)).unwrap();
        let out = run_in(&dir, &["simulate", "--config", config, "--out", out_dir]);
        assert_code(&out, 0);
    }
    for file in ["gbm-run.x.csv", "gbm-run.y.csv", "gbm-run.meta.json"] {
        let a = fs::read(dir.join("first").join(file)).unwrap();
        let b = fs::read(dir.join("second").join(file)).unwrap();
        assert!(!a.is_empty() && a == b, "{file} differs between reruns");
    }
}

#[test]
fn diagnose_gates_exit_code_on_expectation() {
    let dir = workspace("diagnose-gates");
    let sim = write(&dir, "sim.json", GBM_SIM);
    assert_code(&run_in(&dir, &["simulate", "--config", sim.to_str().unwrap()]), 0);
    let ant = write(&dir, "ant.json", ANT_SIM);
    assert_code(&run_in(&dir, &["simulate", "--config", ant.to_str().unwrap()]), 0);

    let ok = write(
        &dir,
        "diag-ok.json",
        &diag_config("gbm-diag", "gbm-run.meta.json", "gbm-run.meta.json", "pass"),
    );
    assert_code(&run_in(&dir, &["diagnose", "--config", ok.to_str().unwrap()]), 0);
    assert!(dir.join("gbm-diag.gap.json").exists());
    assert!(dir.join("gbm-diag.gap.csv").exists());

    let caught = write(
        &dir,
        "diag-caught.json",
        &diag_config("ant-diag", "ant-run.meta.json", "ant-run.meta.json", "reject"),
    );
    assert_code(&run_in(&dir, &["diagnose", "--config", caught.to_str().unwrap()]), 0);

    let wrong = write(
        &dir,
        "diag-wrong.json",
        &diag_config("ant-wrong", "ant-run.meta.json", "ant-run.meta.json", "pass"),
    );
    assert_code(&run_in(&dir, &["diagnose", "--config", wrong.to_str().unwrap()]), 1);

    let json_only = write(
        &dir,
        "diag-json.json",
        &diag_config("gbm-json", "gbm-run.meta.json", "gbm-run.meta.json", "pass"),
    );
    let out = run_in(
        &dir,
        &["diagnose", "--config", json_only.to_str().unwrap(), "--format", "json"],
    );
    assert_code(&out, 0);
    assert!(dir.join("gbm-json.gap.json").exists());
    assert!(!dir.join("gbm-json.gap.csv").exists());
}

#[test]
fn mismatched_runs_cannot_be_compared() {
    let dir = workspace("diagnose-mismatch");
    let sim = write(&dir, "sim.json", GBM_SIM);
    assert_code(&run_in(&dir, &["simulate", "--config", sim.to_str().unwrap()]), 0);
    let other = write(&dir, "other.json", &GBM_SIM.replace("gbm-run", "other-run"));
    assert_code(
        &run_in(&dir, &["simulate", "--config", other.to_str().unwrap(), "--seed", "99"]),
        0,
    );
    let mixed = write(
        &dir,
        "diag-mixed.json",
        &diag_config("mixed", "gbm-run.meta.json", "other-run.meta.json", "pass"),
    );
    assert_code(&run_in(&dir, &["diagnose", "--config", mixed.to_str().unwrap()]), 2);
}

#[test]
fn config_problems_are_usage_errors() {
    let dir = workspace("config-problems");
    assert_code(&run_in(&dir, &["exact"]), 2);
    assert_code(&run_in(&dir, &["exact", "--config", "absent.json"]), 2);

    let garbled = write(&dir, "garbled.json", "{ not json");
    assert_code(&run_in(&dir, &["exact", "--config", garbled.to_str().unwrap()]), 2);

    let stale = write(
        &dir,
        "stale.json",
        r#"{ "schema": "problab/0", "name": "stale" }"#,
    );
    assert_code(&run_in(&dir, &["exact", "--config", stale.to_str().unwrap()]), 2);

    let spaced = write(
        &dir,
        "spaced.json",
        r#"{ "schema": "problab/1", "name": "bad name" }"#,
    );
    assert_code(&run_in(&dir, &["exact", "--config", spaced.to_str().unwrap()]), 2);

    let sectionless = write(
        &dir,
        "sectionless.json",
        r#"{ "schema": "problab/1", "name": "no-section" }"#,
    );
    assert_code(&run_in(&dir, &["bench", "--config", sectionless.to_str().unwrap()]), 2);
}

#[test]
fn flat_bench_reports_exact_zeros_and_short_ladders_fail() {
    let dir = workspace("bench-flat");
    let flat = write(
        &dir,
        "flat.json",
        r#"{
  "schema": "problab/1",
  "name": "flat-bench",
  "paths": 50,
  "out": ".",
  "bench": { "job": "flat-driver", "ladder": [8, 16, 32] }
}"#,
    );
    assert_code(&run_in(&dir, &["bench", "--config", flat.to_str().unwrap()]), 0);
    let doc: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("flat-bench.bench.json")).unwrap()).unwrap();
    assert_eq!(doc["pass"], serde_json::Value::Bool(true));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row["error"].as_f64().unwrap(), 0.0);
    }

    let short = write(
        &dir,
        "short.json",
        r#"{
  "schema": "problab/1",
  "name": "short-bench",
  "bench": { "job": "flat-driver", "ladder": [8, 16] }
}"#,
    );
    assert_code(&run_in(&dir, &["bench", "--config", short.to_str().unwrap()]), 2);
}
