use pi1_core::verify::{run_suite, Suite};

#[test]
fn every_property_in_every_suite_passes() {
    for suite in Suite::ALL {
        let results = run_suite(suite);
        assert!(!results.is_empty());
        for r in &results {
            assert!(
                r.passed,
                "{} / {}: {} (tol {}) {}",
                r.suite, r.name, r.measured, r.tolerance, r.detail
            );
        }
    }
}

#[test]
fn named_properties_are_present() {
    let names = |s| run_suite(s).into_iter().map(|r| r.name).collect::<Vec<_>>();
    assert!(names(Suite::Curvature)
        .iter()
        .any(|n| n == "round-S3 constant-curvature identity"));
    let loops = names(Suite::Loopspace);
    assert!(loops.iter().any(|n| n == "iterate scaling n=3"));
    assert!(names(Suite::Quadrature)
        .iter()
        .any(|n| n.contains("MC determinism")));
}
