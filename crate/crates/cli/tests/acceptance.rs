//! Acceptance suite: criteria 1-9 run in process, criterion 10 runs the
//! binary. One PASS/FAIL line is printed per criterion; run with
//! `cargo test -p spindeq-cli --test acceptance -- --nocapture` to see them.

use std::process::Command;
use std::time::Instant;

use spindeq_core::report::RunReport;
use spindeq_core::suite::{run_all, SuiteConfig};

fn line(id: u8, ok: bool, title: &str, detail: &str) -> String {
    format!("criterion {id:>2}: {} {title} [{detail}]", if ok { "PASS" } else { "FAIL" })
}

#[test]
fn acceptance() {
    let config = SuiteConfig::default();
    let mut lines = Vec::new();
    let mut failed = Vec::new();

    for c in run_all(&config) {
        let worst = c.checks.iter().map(|k| k.residual).fold(0.0, f64::max);
        let detail = format!(
            "{} checks, worst residual {worst:.1e}, {:.3} s of {} s",
            c.checks.len(),
            c.elapsed_seconds,
            c.budget_seconds
        );
        for k in c.checks.iter().filter(|k| !k.pass) {
            eprintln!("  [{}] {}: expected {} got {}", c.id, k.name, k.expected, k.actual);
        }
        if !c.passed() {
            failed.push(c.id);
        }
        lines.push(line(c.id, c.passed(), &c.title, &detail));
    }

    let dir = tempfile::tempdir().expect("temp dir");
    let out = dir.path().join("report.json");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_spindeq"))
        .args(["all", "--out"])
        .arg(&out)
        .env_remove("SPINDEQ_SEED")
        .output()
        .expect("spindeq runs");
    let elapsed = start.elapsed().as_secs_f64();
    let report = std::fs::read_to_string(&out).ok().and_then(|s| RunReport::from_json(&s).ok());
    let complete = report.as_ref().is_some_and(|r| {
        r.passed() && (1..=9).all(|id| r.checks.iter().any(|k| k.name.starts_with(&format!("[{id}]"))))
    });
    let roundtrip = report.as_ref().is_some_and(|r| RunReport::from_json(&r.to_json()).is_ok_and(|back| &back == r));
    let ok = status.status.success() && elapsed < 60.0 && complete && roundtrip;
    if !ok {
        failed.push(10);
        eprintln!("{}", String::from_utf8_lossy(&status.stdout));
        eprintln!("{}", String::from_utf8_lossy(&status.stderr));
    }
    lines.push(line(
        10,
        ok,
        "`spindeq all` exits 0 with a complete report",
        &format!("exit {:?}, {elapsed:.2} s of 60 s", status.status.code()),
    ));

    for l in &lines {
        println!("{l}");
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
