//! End-to-end runs of the `tempsec` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempsec::cli::{cmd_oracle_check, EXIT_INPUT, EXIT_MISMATCH, EXIT_OK};
use tempsec::oracles::check::Solvers;

fn tempsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempsec"))
        .args(args)
        .env_remove("TEMPSEC_SEED")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const CARDINALITY: &str = r#"{
  "instance": {"generator": {"n": 200, "gamma": 0.05, "capacity": 2,
                             "values": {"kind": "uniform-values"}, "seed": 3}},
  "algorithm": {"variant": "cardinality"},
  "trials": 20,
  "seed": 11,
  "oracle": "opt-star"
}"#;

#[test]
fn run_writes_summary_and_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CARDINALITY);
    let out = dir.path().join("out");
    let o = tempsec(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--trace"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));

    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in [
        "ratio",
        "ci_low",
        "ci_high",
        "bound",
        "bound_flags",
        "trials",
        "variant",
        "gamma",
    ] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["trials"], 20);
    let ratio = summary["ratio"].as_f64().unwrap();
    assert!(ratio > 0.0 && ratio <= 1.0);

    let trials = fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 21);
    assert!(trials.starts_with("trial,alg_value,opt_value,"));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 201);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CARDINALITY);
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{k}"));
        let o = tempsec(&[
            "run",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
            "--set",
            "trials=1",
            "--set",
            "seed=7",
        ]);
        assert_eq!(o.status.code(), Some(EXIT_OK));
        outputs.push((
            fs::read(out.join("summary.json")).unwrap(),
            fs::read(out.join("trials.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn env_seed_changes_results_and_set_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CARDINALITY);
    let run = |env: Option<&str>, extra: &[&str]| {
        let out = dir.path().join("o");
        let mut c = Command::new(env!("CARGO_BIN_EXE_tempsec"));
        c.args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
            .args(extra);
        match env {
            Some(s) => c.env("TEMPSEC_SEED", s),
            None => c.env_remove("TEMPSEC_SEED"),
        };
        assert!(c.output().unwrap().status.success());
        let v: Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, &[]), 11);
    assert_eq!(run(Some("99"), &[]), 99);
    assert_eq!(run(Some("99"), &["--set", "seed=5"]), 5);
}

#[test]
fn packing_without_constraints_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = CARDINALITY
        .replace("\"cardinality\"", "\"packing\"")
        .replace("\"opt-star\"", "\"lp\"");
    let cfg = write_config(dir.path(), &body);
    let o = tempsec(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
    assert!(!dir.path().join("o/summary.json").exists());
}

#[test]
fn unknown_key_is_input_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CARDINALITY.replace("\"trials\"", "\"trails\""));
    let o = tempsec(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("config.json:5:"), "{err}");
}

#[test]
fn walk_with_window_equal_to_capacity_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    // γN = 0.05 * 40 = 2 = B: every round of both windows is a one
    let body = CARDINALITY.replace("\"seed\": 11,", "\"seed\": 11,\n  \"diagnostics\": {\"rounds\": 40},");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("w");
    let o = tempsec(&[
        "diagnose",
        "--which",
        "walk",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("walk.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0"), "{line}");
    }
    let s: Value = serde_json::from_slice(&fs::read(out.join("walk_summary.json")).unwrap()).unwrap();
    assert_eq!(s["mean_q"], 0.0);
}

#[test]
fn block_table_has_one_row_per_block() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CARDINALITY);
    let out = dir.path().join("b");
    let o = tempsec(&[
        "diagnose",
        "--which",
        "block",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let csv = fs::read_to_string(out.join("block.csv")).unwrap();
    // ⌊1/√0.05⌋ = 4
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().last().unwrap().split(',').nth(2) == Some("1"));
}

#[test]
fn violation_on_cardinality_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CARDINALITY);
    let o = tempsec(&[
        "diagnose",
        "--which",
        "violation",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
}

#[test]
fn violation_report_for_packing() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{
  "instance": {"generator": {"n": 300, "gamma": 0.1, "capacity": 8,
                             "values": {"kind": "uniform-values"},
                             "constraints": {"kind": "random-sparse", "rows": 3, "per_item": 2,
                                             "coefficients": "uniform"}}},
  "algorithm": {"variant": "packing"},
  "trials": 5,
  "seed": 2,
  "oracle": "lp"
}"#;
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("v");
    let o = tempsec(&[
        "diagnose",
        "--which",
        "violation",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read_to_string(out.join("violation.csv")).unwrap().lines().count(),
        4
    );
    let s: Value = serde_json::from_slice(&fs::read(out.join("violation_summary.json")).unwrap()).unwrap();
    assert_eq!(s["d"], 2);
    let o = tempsec(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = tempsec(&[
        "oracle-check",
        "--count",
        "200",
        "--n-max",
        "12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("oracle_mismatch.json").exists());
}

#[test]
fn oracle_check_rejects_large_n() {
    let o = tempsec(&["oracle-check", "--n-max", "21"]);
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
}

#[test]
fn faulty_solver_writes_repro() {
    let dir = tempfile::tempdir().unwrap();
    let exact = |i: &tempsec::Instance, r: &tempsec::ArrivalRealization| {
        Ok(tempsec::oracles::opt_offline_exact(i, r)?.value + 1.0)
    };
    let solvers = Solvers {
        exact: &exact,
        ..Solvers::default()
    };
    let code = cmd_oracle_check(8, 10, 1, dir.path(), &solvers).unwrap();
    assert_eq!(code, EXIT_MISMATCH);
    let repro: Value = serde_json::from_slice(&fs::read(dir.path().join("oracle_mismatch.json")).unwrap()).unwrap();
    let m = repro["mismatches"].as_array().unwrap();
    assert_eq!(m.len(), 10);
    assert_eq!(m[0]["kind"], "exact");
    assert!(m[0]["arrival_times"].is_array());
}

#[test]
fn bounds_prints_json() {
    let o = tempsec(&[
        "bounds",
        "--variant",
        "cardinality",
        "--gamma",
        "1e-4",
        "--capacity",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.38995).abs() < 1e-5);
    let o = tempsec(&["bounds", "--gamma", "0.1", "--capacity", "1"]);
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_owned();
        if name.ends_with("_instance.json") {
            continue;
        }
        let loaded = tempsec::config::load_config(&path, &["trials=1".to_string()]).unwrap();
        let inst = loaded.config.instance.load(&loaded.base_dir).unwrap();
        assert!(!inst.is_empty(), "{name}");
        seen += 1;
    }
    assert!(seen >= 5);
}
