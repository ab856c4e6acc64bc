//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! with the measured value and the bound it was held to.

use bco_harness::acceptance::criterion;

fn check(id: usize) {
    let c = criterion(id);
    println!("{c}");
    assert!(c.pass, "{c}");
}

#[test]
fn c01_sphere_covariance() {
    check(1);
}

#[test]
fn c02_estimator_bias() {
    check(2);
}

#[test]
fn c03_second_moment() {
    check(3);
}

#[test]
fn c04_per_round_bound() {
    check(4);
}

#[test]
fn c05_one_step_inequality() {
    check(5);
}

#[test]
fn c06_nonsmooth_counterexample() {
    check(6);
}

#[test]
fn c07_prediction_error_scaling() {
    check(7);
}

#[test]
fn c08_adaptivity_overhead() {
    check(8);
}

#[test]
fn c09_single_point_barrier() {
    check(9);
}

#[test]
fn c10_lower_bound_identity() {
    check(10);
}

#[test]
fn c11_dynamic_regret_scaling() {
    check(11);
}

#[test]
fn c12_meta_layer() {
    check(12);
}

#[test]
fn c13_coordinate_recovery() {
    check(13);
}
