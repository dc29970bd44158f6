mod common;

use std::sync::Arc;

use linspec::spectral::{
    count_below, eigen_shooting, eigen_tridiagonal, embedded_scan, rayleigh_identity, richardson,
    verify_glazman_bounds, verify_monotonicity, BetaEigenvalue, ShootingOutcome,
};
use linspec::tolerances::{DEFAULT_TOL, RICHARDSON_STEPS};
use linspec::OperatorSpec;

#[test]
fn unit_coupling_zero_mode_by_both_engines() {
    let q = common::profile();
    let op = OperatorSpec::new(1.0, 0, Arc::clone(&q)).unwrap();
    let tri = eigen_tridiagonal(&op, (-0.5, 0.9), 1e-3).unwrap();
    assert_eq!(tri.eigenpairs.len(), 1);
    assert!(tri.eigenpairs[0].eigenvalue.abs() < 1e-6);
    let shot = eigen_shooting(&op, (-0.1, 0.1), DEFAULT_TOL).unwrap().found().unwrap();
    assert!(shot.eigenvalue.abs() < 1e-8, "{}", shot.eigenvalue);
}

#[test]
fn bottom_of_the_unmixed_operator() {
    let q = common::profile();
    let op = OperatorSpec::new(3.0, 0, Arc::clone(&q)).unwrap();
    let ex = richardson(&op, (-20.0, 0.0), &RICHARDSON_STEPS).unwrap();
    assert_eq!(ex.len(), 1);
    let shot = eigen_shooting(&op, (-20.0, 0.0), DEFAULT_TOL).unwrap().found().unwrap();
    assert!((ex[0].eigenvalue - shot.eigenvalue).abs() < 1e-6);
    assert_eq!(shot.node_count, 0);
    assert_eq!(count_below(&op, 0.999, DEFAULT_TOL).unwrap(), 1);
}

#[test]
fn mid_family_eigenfunction_is_positive() {
    let q = common::profile();
    let ground = OperatorSpec::new(3.0, 0, Arc::clone(&q)).unwrap();
    let lambda0 = eigen_shooting(&ground, (-20.0, 0.0), DEFAULT_TOL).unwrap().found().unwrap().eigenvalue;
    let op = OperatorSpec::from_beta(0.5, 0, Arc::clone(&q)).unwrap();
    let e = eigen_shooting(&op, (lambda0, 0.0), DEFAULT_TOL).unwrap().found().unwrap();
    assert_eq!(e.node_count, 0);
    assert!(e.eigenfunction.u()[1..].iter().all(|u| *u > 0.0));
    assert_eq!(count_below(&op, 0.0, DEFAULT_TOL).unwrap(), 1);
    assert_eq!(count_below(&op, e.eigenvalue - 1e-4, DEFAULT_TOL).unwrap(), 0);
    let tri = eigen_tridiagonal(&op, (-20.0, 1.0), 1e-3).unwrap();
    assert!(tri.clipped);
    assert_eq!(tri.eigenpairs.len(), 1);
    assert!(verify_glazman_bounds(lambda0, &[e.eigenvalue], 1e-6).pass);
}

#[test]
fn no_eigenvalue_inside_the_gap() {
    let q = common::profile();
    for beta in [0.2, 0.6, 0.9] {
        let op = OperatorSpec::from_beta(beta, 0, Arc::clone(&q)).unwrap();
        assert!(matches!(eigen_shooting(&op, (0.2, 0.8), DEFAULT_TOL).unwrap(), ShootingOutcome::NoEigenvalue));
    }
}

#[test]
fn family_stays_negative_near_the_end() {
    let q = common::profile();
    let ground = OperatorSpec::new(3.0, 0, Arc::clone(&q)).unwrap();
    let lambda0 = eigen_shooting(&ground, (-20.0, 0.5), DEFAULT_TOL).unwrap().found().unwrap().eigenvalue;
    let rows: Vec<BetaEigenvalue> = [0.0, 0.5, 0.9, 0.99]
        .iter()
        .map(|&beta| {
            let op = OperatorSpec::from_beta(beta, 0, Arc::clone(&q)).unwrap();
            let e = eigen_shooting(&op, (-20.0, 0.5), DEFAULT_TOL).unwrap().found().unwrap();
            BetaEigenvalue { beta, eigenvalue: e.eigenvalue }
        })
        .collect();
    assert_eq!(rows[0].eigenvalue, lambda0);
    let check = verify_monotonicity(lambda0, &rows, 1e-6).unwrap();
    assert!(check.pass);
    assert!(rows[3].eigenvalue < 0.0);
}

#[test]
fn quadratic_form_examples() {
    let q = common::profile();
    let quartic = 4.0 * std::f64::consts::PI * q.q_quadrature(|q, _, _| q.powi(4)).unwrap();
    let at0 = rayleigh_identity(&q, 0.0).unwrap();
    assert!(at0.quadrature < 0.0 && at0.pass);
    assert!((at0.closed_form + 2.0 * quartic).abs() < 1e-12 * quartic);
    let half = rayleigh_identity(&q, 0.5).unwrap();
    assert!((half.closed_form + 2.0 / 3.0 * quartic).abs() < 1e-12 * quartic);
    assert!(half.pass);
    let one = rayleigh_identity(&q, 1.0).unwrap();
    assert_eq!(one.closed_form, 0.0);
    assert!(one.quadrature.abs() < 1e-8 && one.pass);
}

#[test]
fn envelope_of_scattering_solutions() {
    let q = common::profile();
    let free = OperatorSpec::new(0.0, 0, Arc::clone(&q)).unwrap();
    let s = embedded_scan(&free, &[2.0], DEFAULT_TOL).unwrap();
    assert!((s[0].ratio - 1.0).abs() < 1e-6, "{}", s[0].ratio);
    let mixed = OperatorSpec::from_beta(0.5, 0, Arc::clone(&q)).unwrap();
    assert!(embedded_scan(&mixed, &[2.0], DEFAULT_TOL).unwrap()[0].pass);
    let ground = OperatorSpec::new(3.0, 0, Arc::clone(&q)).unwrap();
    assert!(embedded_scan(&ground, &[1.1], DEFAULT_TOL).unwrap()[0].pass);
}
