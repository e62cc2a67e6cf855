use std::path::Path;
use std::process::{Command, Output};

use spindeq_core::report::RunReport;

fn spindeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spindeq")).args(args).env_remove("SPINDEQ_SEED").output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn read_report(p: &Path) -> RunReport {
    RunReport::from_json(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn grassmann_dequantization_reports_an_exact_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let out = spindeq(&["verify-dequantization", "--case", "grassmann", "--report", arg(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_report(&path);
    let residual = report.checks.iter().find(|c| c.name.ends_with("residual")).unwrap();
    assert_eq!(residual.actual, "0");
    assert!(report.artifacts["identities"][0]["raw"].as_str().unwrap().contains("lambda_xibar"));
}

#[test]
fn custom_hamiltonians_and_hbar() {
    let out = spindeq(&["verify-dequantization", "--case", "bosonic", "--hamiltonian", "q^3*p + p^4/4", "--hbar"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("residual   = 0"));
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(spindeq(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(spindeq(&["verify-dequantization", "--case", "fermionic"]).status.code(), Some(2));
    assert_eq!(spindeq(&["verify-dequantization", "--case", "bosonic", "--builtin", "nope"]).status.code(), Some(2));
    assert_eq!(
        spindeq(&["verify-dequantization", "--case", "bosonic", "--hamiltonian", "q +* p"]).status.code(),
        Some(2)
    );
    assert_eq!(spindeq(&["propagate-quantum", "--b", "1,2"]).status.code(), Some(2));
    assert_eq!(spindeq(&["propagate-classical", "--case", "bosonic", "--builtin", "quartic"]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_1_and_are_named() {
    let out = spindeq(&["propagate-quantum", "--b", "3,0,0", "--t", "2", "--slices", "100,200"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED: error at n = 200"));
}

#[test]
fn convergence_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let out = spindeq(&["propagate-quantum", "--b", "0.6,-0.8,0", "--slices", "125,250", "--out", arg(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["n", "max_error_vs_oracle", "wall_time"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let e: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(e[0] > e[1]);
}

#[test]
fn precession_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let out = spindeq(&[
        "precession",
        "--theta0",
        "1.1",
        "--phi0",
        "0.5",
        "--muB",
        "2",
        "--t",
        "3",
        "--steps",
        "30",
        "--out",
        arg(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["t", "theta", "phi", "eta", "H"]);
    for r in rdr.records().map(Result::unwrap) {
        let t: f64 = r[0].parse().unwrap();
        let phi: f64 = r[2].parse().unwrap();
        let expected = (0.5 - 2.0 * t).rem_euclid(std::f64::consts::TAU);
        assert!((phi - expected).abs() < 1e-12);
        assert_eq!(r[1].parse::<f64>().unwrap(), 1.1);
    }
}

#[test]
fn classical_propagation_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let out = spindeq(&[
        "propagate-classical",
        "--case",
        "grassmann",
        "--omega",
        "0.7",
        "--t",
        "1.5",
        "--truncation",
        "3",
        "--out",
        arg(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_report(&path);
    assert_eq!(report.artifacts["spectrum"], "real");
    let phases = report.artifacts["eigenphases"].as_array().unwrap();
    let xi = phases.iter().find(|p| p["monomial"] == "xi").unwrap();
    assert!((xi["eigenvalue"][0].as_f64().unwrap() - 0.7).abs() < 1e-12);
    assert!(report.checks.iter().any(|c| c.name == "phase[xi]"));
}

#[test]
fn seeded_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    spindeq(&["check-dirac", "--samples", "40", "--seed", "11", "--out", arg(&a)]);
    let env = Command::new(env!("CARGO_BIN_EXE_spindeq"))
        .args(["check-dirac", "--samples", "40", "--out", arg(&b)])
        .env("SPINDEQ_SEED", "11")
        .status()
        .unwrap();
    assert!(env.success());
    spindeq(&["check-dirac", "--samples", "40", "--seed", "12", "--out", arg(&c)]);
    let (ra, rb, rc) = (read_report(&a), read_report(&b), read_report(&c));
    assert_eq!(ra.checks, rb.checks);
    assert_eq!(ra.parameters, rb.parameters);
    assert_ne!(ra.checks, rc.checks);
}
