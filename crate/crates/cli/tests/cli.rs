use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchstat"))
        .args(args)
        .env_remove("MATCHSTAT_THREADS")
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    v
}

fn error_of(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    assert!(!out.status.success());
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    (out.status.code().unwrap(), v)
}

#[test]
fn covariance_at_n2() {
    let v = json_ok(&["cov", "--n", "2"]);
    assert_eq!(v["command"], "cov");
    assert_eq!(v["result"]["covariance"], "-1/9");
    assert_eq!(v["result"]["correlation"], -0.5);
}

#[test]
fn correlation_at_n7() {
    let v = json_ok(&["cov", "--n", "7"]);
    let r = v["result"]["correlation"].as_f64().unwrap();
    assert!((r + 0.293696032).abs() < 5e-10);
}

#[test]
fn joint_cdf_at_time_zero() {
    let v = json_ok(&["cdf", "joint", "--t", "0", "--k", "3", "--j", "3"]);
    assert_eq!(v["result"]["value_f64"], 1.0);
    assert_eq!(v["result"]["value"], "1");
}

#[test]
fn cdf_routes_agree() {
    let get = |route: &str| {
        let v = json_ok(&["cdf", "joint", "--t", "0.5", "--k", "2", "--j", "3", "--route", route]);
        v["result"]["value_f64"].as_f64().unwrap()
    };
    let d = get("det");
    assert!((d - get("prop1")).abs() < 1e-12);
    assert!((d - get("poisson")).abs() < 1e-8);
}

#[test]
fn nes_expansion_report_has_fit() {
    let v = json_ok(&["verify", "thm13", "--x", "0", "--tgrid", "20,40,80,160"]);
    let fit = &v["result"]["fit"];
    assert!(fit["slope"].as_f64().unwrap().is_finite());
    assert_eq!(fit["points"].as_array().unwrap().len(), 4);
    assert_eq!(v["result"]["points"].as_array().unwrap().len(), 4);
}

#[test]
fn deterministic_across_runs_and_threads() {
    for args in [
        vec!["sample", "--n", "40", "--reps", "300", "--seed", "9"],
        vec!["walks", "--t", "0.4", "--N", "2", "--reps", "70000", "--seed", "3"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        let mut one = vec!["--threads", "1"];
        one.extend(&args);
        assert_eq!(run(&one).stdout, a.stdout);
    }
}

#[test]
fn params_json_merges() {
    let a = json_ok(&["cdf", "joint", "--params-json", r#"{"t": 1, "k": 2, "j": 2}"#]);
    let b = json_ok(&["cdf", "joint", "--t", "1", "--k", "2", "--j", "2"]);
    assert_eq!(a["result"], b["result"]);
    let c = json_ok(&["verify", "prop63", "--params-json", r#"{"tgrid": [10, 20, 40]}"#]);
    assert_eq!(c["result"]["points"].as_array().unwrap().len(), 3);
}

#[test]
fn csv_to_file() {
    let dir = std::env::temp_dir().join(format!("matchstat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.csv");
    let out = run(&["table", "--n", "3", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,j,g"));
    assert_eq!(lines.count(), 16);
    assert!(text.contains("3,3,15"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    let (code, v) = error_of(&["cov"]);
    assert_eq!((code, v["error_kind"].as_str()), (2, Some("validation")));
    let (code, v) = error_of(&["cov", "--n", "20"]);
    assert_eq!((code, v["error_kind"].as_str()), (4, Some("capacity")));
    let (code, v) = error_of(&["det", "toeplitz", "--t", "1", "--n", "3", "--tol-bits", "140000"]);
    assert_eq!((code, v["error_kind"].as_str()), (3, Some("precision")));
    assert!(v["suggested_bits"].as_u64().unwrap() > 140000);
    let (code, v) = error_of(&["tw", "--x", "50"]);
    assert_eq!((code, v["error_kind"].as_str()), (2, Some("range")));
    let (code, _) = error_of(&["moments", "--weight", "discrete", "--t", "1"]);
    assert_eq!(code, 2);
    let (code, _) = error_of(&["--threads", "0", "cov", "--n", "2"]);
    assert_eq!(code, 2);
}

#[test]
fn tw_table_moments() {
    let v = json_ok(&["tw-table", "--kind", "goe", "--from", "-2", "--to", "2", "--step", "1"]);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 5);
    let var = v["result"]["variance"].as_f64().unwrap();
    assert!((var - 1.6077810345).abs() < 1e-6);
}
