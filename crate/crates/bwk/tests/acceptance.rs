//! The acceptance battery, one test per numbered criterion. Each test
//! prints the one-line verdict (visible under `--nocapture` or on
//! failure) and asserts it passed. `bwk suite` runs the same checks from
//! the command line.

use bwk::suite;

const SEED: u64 = 7;

fn assert_criterion(outcome: bwk::suite::CriterionOutcome) {
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_01_confidence_radius_properties() {
    assert_criterion(suite::criterion_1(SEED));
}

#[test]
fn criterion_02_multiplicative_weights_guarantee() {
    assert_criterion(suite::criterion_2(SEED));
}

#[test]
fn criterion_03_lp_oracle_vs_brute_force() {
    assert_criterion(suite::criterion_3(SEED));
}

#[test]
fn criterion_04_round_robin_separation() {
    assert_criterion(suite::criterion_4(SEED, &mut Vec::new()));
}

#[test]
fn criterion_05_deterministic_warm_up_bound() {
    assert_criterion(suite::criterion_5(SEED));
}

#[test]
fn criterion_06_lower_bound_closed_forms() {
    assert_criterion(suite::criterion_6(SEED, &mut Vec::new()));
}

#[test]
fn criterion_07_two_price_advantage() {
    assert_criterion(suite::criterion_7(SEED));
}

#[test]
fn criterion_08_mesh_discretization_error() {
    assert_criterion(suite::criterion_8(SEED));
}

#[test]
fn criterion_09_balanced_exploration_advantage() {
    assert_criterion(suite::criterion_9(SEED, &mut Vec::new()));
}

#[test]
fn criterion_10_budget_scaling_slope() {
    assert_criterion(suite::criterion_10(SEED, &mut Vec::new()));
}

#[test]
fn criterion_11_seeded_determinism() {
    assert_criterion(suite::criterion_11(SEED, &mut Vec::new()));
}
