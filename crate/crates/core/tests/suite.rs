use spindeq_core::report::RunReport;
use spindeq_core::suite::{run_all, to_report, SuiteConfig};

#[test]
fn every_criterion_check_passes() {
    let config = SuiteConfig::default();
    let criteria = run_all(&config);
    assert_eq!(criteria.len(), 9);
    for c in &criteria {
        for check in c.checks.iter().filter(|k| !k.pass) {
            eprintln!(
                "[{}] {}: expected {} got {} (residual {:e})",
                c.id, check.name, check.expected, check.actual, check.residual
            );
        }
        assert!(c.checks_pass(), "criterion {} failed", c.id);
        eprintln!("[{}] {:.3}s", c.id, c.elapsed_seconds);
    }
}

#[test]
fn reports_are_deterministic_and_roundtrip() {
    let config = SuiteConfig { dirac_samples: 10, random_fields: 5, ..SuiteConfig::default() };
    let strip = |r: &RunReport| -> Vec<(String, bool, String)> {
        r.checks
            .iter()
            .filter(|c| !c.name.contains("runtime"))
            .map(|c| (c.name.clone(), c.pass, c.actual.to_string()))
            .collect()
    };
    let a = to_report(&config, &run_all(&config), 1.0);
    let b = to_report(&config, &run_all(&config), 2.0);
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(RunReport::from_json(&a.to_json()).unwrap(), a);
}
