//! The verification suite as an integration test target: one test per
//! criterion, each printing its pass/fail line. `cargo test --test
//! acceptance -- --nocapture` shows the full listing; the `verify`
//! subcommand runs the same checks.

use homindex::acceptance::{self, CriterionResult};

const SEED: u64 = 0;

fn check(result: CriterionResult) {
    println!(
        "criterion {:2} [{}] {} — {}",
        result.id,
        if result.passed { "pass" } else { "FAIL" },
        result.name,
        result.details
    );
    assert!(
        result.passed,
        "criterion {} failed: {}",
        result.id, result.details
    );
}

#[test]
fn criterion_01_diagonal_path_parity() {
    check(acceptance::criterion_1_diagonal_path_parity());
}

#[test]
fn criterion_02_conjugation_identity() {
    check(acceptance::criterion_2_conjugation_identity());
}

#[test]
fn criterion_03_closed_loop_triviality() {
    check(acceptance::criterion_3_closed_loop_triviality(SEED));
}

#[test]
fn criterion_04_degree_consistency() {
    check(acceptance::criterion_4_degree_consistency(SEED));
}

#[test]
fn criterion_05_parity_equals_spectral_flow() {
    check(acceptance::criterion_5_parity_equals_spectral_flow(SEED));
}

#[test]
fn criterion_06_kernel_bundle_invariance() {
    check(acceptance::criterion_6_kernel_bundle_invariance(SEED));
}

#[test]
fn criterion_07_moebius_w1() {
    check(acceptance::criterion_7_moebius_w1());
}

#[test]
fn criterion_08_pejsachowicz_circle() {
    check(acceptance::criterion_8_pejsachowicz_circle());
}

#[test]
fn criterion_09_pejsachowicz_torus() {
    check(acceptance::criterion_9_pejsachowicz_torus());
}

#[test]
fn criterion_10_analytic_residuals() {
    check(acceptance::criterion_10_analytic_residuals());
}

#[test]
fn criterion_11_theorem_pipeline() {
    check(acceptance::criterion_11_theorem_pipeline());
}
