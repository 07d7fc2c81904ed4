use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fairagg(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairagg"))
        .arg("--output")
        .arg(out)
        .args(["--key-bits", "256"])
        .args(args)
        .env_remove("FAIRAGG_OUTPUT")
        .env_remove("FAIRAGG_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr_error(o: &Output) -> Value {
    assert!(!o.status.success());
    let v: Value = serde_json::from_slice(&o.stderr).expect("stderr is JSON");
    v["error"].clone()
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&fairagg(dir.path(), &["run"]));
    assert_eq!(v["released"], true);
    assert_eq!(v["verified"]["passed"], true);
    for f in [
        "report.json",
        "ops.csv",
        "transcript.jsonl",
        "metadata.json",
    ] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["name"], "smoke");
    assert!(report["ground_truth"]["dp_violation"].is_f64());
}

#[test]
fn lower_bound_violation_exits_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fairagg(dir.path(), &["--sigma", "1000", "verify-config"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_error(&o)["kind"], "lower_bound_violation");
}

#[test]
fn bad_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = fairagg(dir.path(), &["--preset", "missing", "run"]);
    assert_eq!(stderr_error(&o)["kind"], "config");
    let o = fairagg(dir.path(), &["--config", "/nonexistent/cfg.json", "run"]);
    assert_eq!(stderr_error(&o)["kind"], "io");
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"name\": 3}").unwrap();
    let o = fairagg(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "verify-config"],
    );
    assert_eq!(stderr_error(&o)["kind"], "config");
    let o = fairagg(dir.path(), &["--participants", "2", "verify-config"]);
    assert_eq!(stderr_error(&o)["kind"], "config");
}

#[test]
fn config_file_round_trips_through_verify_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fairagg_core::experiment::preset("malicious").unwrap();
    let path = dir.path().join("malicious.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    let v = stdout_json(&fairagg(
        dir.path(),
        &["--config", path.to_str().unwrap(), "verify-config"],
    ));
    assert_eq!(v["valid"], true);
    assert_eq!(v["name"], "malicious");
}

#[test]
fn malicious_run_aborts_without_release() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&fairagg(dir.path(), &["--preset", "malicious", "run"]));
    assert_eq!(v["released"], false);
    assert_eq!(v["verified"]["accused"], 3);
}

#[test]
fn keygen_generate_bench_and_attack() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&fairagg(dir.path(), &["keygen", "-k", "2"]));
    assert_eq!(v["threshold_k"], 2);
    let keys = std::fs::read_to_string(dir.path().join("keys.json")).unwrap();
    assert_eq!(
        fairagg_core::KeyMaterial::from_json(&keys)
            .unwrap()
            .threshold_k,
        2
    );

    let v = stdout_json(&fairagg(dir.path(), &["--participants", "5", "generate"]));
    assert_eq!(v["participants"], 5);
    let csv = std::fs::read_to_string(dir.path().join("federation.csv")).unwrap();
    assert!(csv.starts_with("participant,record,label,attributes,score"));
    assert_eq!(
        csv.lines().count() as u64,
        1 + v["records"].as_u64().unwrap()
    );

    let v = stdout_json(&fairagg(dir.path(), &["bench", "--sizes", "10,20"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["additions_per_statistic"], 9);
    assert_eq!(rows[1]["additions_per_statistic"], 19);

    let v = stdout_json(&fairagg(
        dir.path(),
        &["--preset", "attack", "attack", "--trials", "200"],
    ));
    assert_eq!(v["attack"]["trials"], 200);
    let csv = std::fs::read_to_string(dir.path().join("attack.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_fairagg"))
        .args(["--key-bits", "256", "--threads", "1", "keygen"])
        .env("FAIRAGG_OUTPUT", &out)
        .output()
        .unwrap();
    stdout_json(&o);
    assert!(out.join("keys.json").is_file());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    stdout_json(&fairagg(a.path(), &["--seed", "7", "run"]));
    stdout_json(&fairagg(b.path(), &["--seed", "7", "run"]));
    for f in [
        "report.json",
        "ops.csv",
        "transcript.jsonl",
        "metadata.json",
    ] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
