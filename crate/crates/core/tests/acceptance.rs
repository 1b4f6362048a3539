//! Acceptance gate: one test per release criterion, each delegating to
//! the named validation check and enforcing its runtime budget where
//! one is stated.  `cargo test --test acceptance` prints exactly one
//! pass/fail line per criterion.

use std::time::Duration;

use curvesvd::{run_check, ValidationConfig};

fn criterion(number: usize, name: &str, budget: Option<Duration>) {
    let outcome = run_check(name, &ValidationConfig::default())
        .unwrap_or_else(|| panic!("unknown check {name}"));
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    println!(
        "criterion {number} ({name}): {status} — {} [{:.2?}]",
        outcome.detail, outcome.elapsed
    );
    assert!(
        outcome.passed,
        "criterion {number} ({name}) failed: {}",
        outcome.detail
    );
    if let Some(budget) = budget {
        assert!(
            outcome.elapsed <= budget,
            "criterion {number} ({name}) took {:.2?}, budget {budget:.2?}",
            outcome.elapsed
        );
    }
}

#[test]
fn criterion_01_coefficient_table() {
    criterion(1, "coefficient-table", Some(Duration::from_secs(1)));
}

#[test]
fn criterion_02_hankel_recurrence() {
    criterion(2, "hankel-recurrence", Some(Duration::from_secs(5)));
}

#[test]
fn criterion_03_selberg_oracle() {
    criterion(3, "selberg-oracle", Some(Duration::from_secs(5)));
}

#[test]
fn criterion_04_ortho_poly_recurrence() {
    criterion(4, "ortho-poly-recurrence", None);
}

#[test]
fn criterion_05_twisted_cubic_digits() {
    criterion(5, "twisted-cubic-digits", Some(Duration::from_secs(1)));
}

#[test]
fn criterion_06_precision_scaling() {
    criterion(6, "precision-scaling", None);
}

#[test]
fn criterion_07_frame_agreement() {
    criterion(7, "frame-agreement", Some(Duration::from_secs(1)));
}

#[test]
fn criterion_08_eigenvalue_scaling() {
    criterion(8, "eigenvalue-scaling", None);
}

#[test]
fn criterion_09_generation_round_trip() {
    criterion(9, "generation-round-trip", Some(Duration::from_secs(60)));
}

#[test]
fn criterion_10_reparameterization_invariance() {
    criterion(10, "reparameterization-invariance", None);
}
