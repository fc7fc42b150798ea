//! One PASS/FAIL line per acceptance criterion.
//!
//! Two criteria fail by analysis and are listed as known failures: the suite
//! still prints FAIL for them, and the test breaks if either starts passing.
//! Criterion 3: evaluating the approximate variance at the approximate saddle
//! puts the two estimators 15s/(8π²) apart with s = π/√(6n), which is 2.4% at
//! n = 100 and 1.1% at n = 500.
//! Criterion 9: the estimator overshoots the exact central binomial by
//! 1/(4n) + 1/(32n²), which exceeds the 1/(4n) bound at every n.

use kfam::validation;

const KNOWN_FAILURES: [u8; 2] = [3, 9];

#[test]
fn acceptance_criteria() {
    let reports = validation::run_all();
    for r in &reports {
        println!("{}", r.line());
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", reports.len());
    for r in &reports {
        let known = KNOWN_FAILURES.contains(&r.id);
        assert_eq!(r.passed, !known, "criterion {} changed status: {}", r.id, r.detail);
    }
}
