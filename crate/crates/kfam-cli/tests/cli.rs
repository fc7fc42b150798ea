//! End-to-end runs of the `kf` binary.

use std::process::{Command, Output};

fn kf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kf")).args(args).env_remove("KF_TRUNC").output().expect("kf runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn coeff_partition_rows() {
    let o = kf(&["coeff", "--family", "P", "--n", "100", "--method", "exact,hayman,hr", "--out", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "method,n,value,value_ln,ratio");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("exact,100,190569292,ln="), "{}", lines[1]);
    let hr_ratio: f64 = lines[3].rsplit(',').next().unwrap().parse().unwrap();
    assert!((1.0 / hr_ratio - 1.0457).abs() < 0.002, "{hr_ratio}");
}

#[test]
fn family_bell_moments() {
    let o = kf(&["family", "--family", "bell", "--t", "2", "--stats", "mean,var", "--out", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let e2 = 2f64.exp();
    let vals: Vec<f64> = s.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!((vals[0] - 2.0 * e2).abs() < 1e-9 * e2);
    assert!((vals[1] - 6.0 * e2).abs() < 1e-9 * e2);
}

#[test]
fn largepow_auto_picks_comparable() {
    let o = kf(&["largepow", "--psi", "poly:1,1", "--n", "1000", "--k", "500", "--regime", "auto", "--out", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["regime"], "comparable");
    let r = v["ratio"].as_f64().unwrap();
    assert!((r - 1.0).abs() < 1e-3, "{r}");
    assert!(v["value"].is_number() && v["exact_ln"].is_number());
}

#[test]
fn lagrange_borel_and_trees() {
    let o = kf(&["lagrange", "--psi", "exp", "--n", "20", "--method", "exact,omm", "--out", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let omm = s.lines().nth(2).unwrap();
    let r: f64 = omm.rsplit(',').next().unwrap().parse().unwrap();
    assert!((r - 1.0).abs() <= 1.0 / 80.0, "{r}");
    let o = kf(&["lagrange", "--psi", "exp", "--n", "200", "--method", "borel", "--t", "0.5", "--k", "3", "--out", "csv"]);
    let r: f64 = stdout(&o).lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((r - 1.0).abs() < 0.02, "{r}");
}

#[test]
fn diag_header_and_monotone_columns() {
    let o = kf(&["diag", "--family", "exp", "--t", "10,100,1000", "--out", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("t,S_t,sg_integral,gaussianity\n"));
    let sg: Vec<f64> = s.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(sg.windows(2).all(|w| w[1] < w[0]), "{sg:?}");
}

#[test]
fn output_is_deterministic() {
    let args = ["lagrange", "--psi", "exp", "--n", "3", "--method", "sample", "--t", "0.5", "--trials", "5000", "--seed", "11"];
    assert_eq!(kf(&args).stdout, kf(&args).stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(kf(&["coeff", "--n", "3"]).status.code(), Some(2));
    assert_eq!(kf(&["coeff", "--family", "P", "--n", "3", "--method", "nope"]).status.code(), Some(2));
    assert_eq!(kf(&["coeff", "--family", "P", "--n", "3", "--trunc", "100001"]).status.code(), Some(2));
    let o = kf(&["family", "--family", "geom", "--t", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("RadiusOutOfRange"));
    let o = kf(&["coeff", "--family", "bogus", "--n", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.starts_with("InvalidSpec") && err.contains("grammar:"), "{err}");
    assert_eq!(kf(&["--help"]).status.code(), Some(0));
}

#[test]
fn kf_trunc_env_overrides_default() {
    let o = Command::new(env!("CARGO_BIN_EXE_kf"))
        .args(["coeff", "--family", "exp", "--n", "50", "--method", "exact"])
        .env("KF_TRUNC", "20")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("IndexBeyondTruncation"));
}
