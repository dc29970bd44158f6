mod common;

use linspec::resonance::{
    nonradial_identity, resonance_verdict, shifted_comparison, sturm_record, synthetic_control, threshold_solution,
    Classification,
};
use linspec::tolerances::{DEFAULT_TOL, PROFILE_STEP, SLOPE_THRESHOLD};
use linspec::{coupling_coefficient, solve_ground_state, RadialGrid};

#[test]
fn free_threshold_solutions_have_closed_forms() {
    let q = common::profile();
    let line = threshold_solution(&q, 0.0, 0.0, DEFAULT_TOL).unwrap();
    for (r, u) in line.grid().nodes().iter().zip(line.u()) {
        assert!((u + r).abs() < 1e-12 * r.max(1.0), "r = {r}: {u}");
    }
    let sinh = threshold_solution(&q, 0.0, 0.25, DEFAULT_TOL).unwrap();
    for (r, u) in sinh.grid().nodes().iter().zip(sinh.u()) {
        let exact = -2.0 * (r / 2.0).sinh();
        assert!((u - exact).abs() < 1e-9 * exact.abs(), "r = {r}: {u} vs {exact}");
    }
}

#[test]
fn mid_family_threshold_solution_changes_sign() {
    let q = common::profile();
    let f = threshold_solution(&q, coupling_coefficient(0.5).unwrap(), 0.0, DEFAULT_TOL).unwrap();
    let zeros = f.zeros();
    assert_eq!(zeros.len(), 1);
    assert!(zeros[0] > 0.0);
}

#[test]
fn thresholds_are_regular() {
    let q = common::profile();
    for c in [coupling_coefficient(0.5).unwrap(), 3.0, 1.0] {
        let v = resonance_verdict(&q, c, DEFAULT_TOL, SLOPE_THRESHOLD).unwrap();
        assert_eq!(v.classification, Classification::NoResonance, "coupling {c}");
        assert!(v.tail_slope.abs() > SLOPE_THRESHOLD);
    }
}

#[test]
fn detector_flips_at_the_tuned_coupling() {
    let q = common::profile();
    let control = synthetic_control(&q, DEFAULT_TOL, SLOPE_THRESHOLD).unwrap();
    assert!(control.pass);
    assert_eq!(control.verdict.classification, Classification::ResonanceSuspected);
    assert!(control.coupling > 0.0 && control.coupling < 1.0);
}

#[test]
fn weighted_norms_grow_with_the_ball() {
    let q = common::profile();
    let v = resonance_verdict(&q, coupling_coefficient(0.3).unwrap(), DEFAULT_TOL, SLOPE_THRESHOLD).unwrap();
    let ratios = v.doubling_ratios();
    assert_eq!(ratios.len(), 4);
    // A linearly growing solution: the unweighted norm scales like R³.
    assert!((ratios[0] - 8.0).abs() < 0.2 * 8.0, "{ratios:?}");
    assert!(ratios.iter().all(|r| *r > 1.0), "{ratios:?}");
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn tail_slope_is_stable_under_truncation() {
    let long = common::profile();
    let grid = RadialGrid::uniform(PROFILE_STEP, 25.0).unwrap();
    let short = solve_ground_state(DEFAULT_TOL, &grid).unwrap();
    let c = coupling_coefficient(0.7).unwrap();
    let a = resonance_verdict(&long, c, DEFAULT_TOL, SLOPE_THRESHOLD).unwrap().tail_slope;
    let b = resonance_verdict(&short, c, DEFAULT_TOL, SLOPE_THRESHOLD).unwrap().tail_slope;
    assert!((a - b).abs() < 1e-6 * a.abs(), "{a} vs {b}");
}

#[test]
fn sturm_zeros_are_ordered() {
    let q = common::profile();
    let record = sturm_record(&q, 0.5, -3.78, &[0.1, 0.3, 0.5], DEFAULT_TOL).unwrap();
    assert_eq!(record.reference_zeros, 1);
    assert!(record.ordering_ok && record.pass);
    let zeros: Vec<f64> = record.r_eps.iter().map(|(_, z)| z.unwrap()).collect();
    assert!(zeros.windows(2).all(|w| w[0] <= w[1]));
    assert!(record.r_star.unwrap() <= record.r_zero.unwrap());
}

#[test]
fn shifted_comparison_at_threshold() {
    let q = common::profile();
    let c = shifted_comparison(&q, 0.5, 0.0, DEFAULT_TOL).unwrap();
    assert!(c.pass);
    assert!(c.shifted_minimum > 0.0);
    let f = threshold_solution(&q, coupling_coefficient(0.5).unwrap(), 0.0, DEFAULT_TOL).unwrap();
    assert!(f.eval(c.r_eps).0.abs() < 1e-10);
}

#[test]
fn nonradial_identity_terms() {
    let q = common::profile();
    let p_wave = nonradial_identity(&q, 0.5, 1, DEFAULT_TOL).unwrap();
    assert_eq!(p_wave.mu, 2.0);
    assert_eq!(p_wave.centrifugal, 0.0);
    assert!(p_wave.relative_residual < 1e-6);
    assert!(p_wave.coupling > 0.0);

    let small = nonradial_identity(&q, 1e-3, 4, DEFAULT_TOL).unwrap();
    let mid = nonradial_identity(&q, 0.5, 4, DEFAULT_TOL).unwrap();
    assert!(small.relative_residual < 1e-6);
    assert!(small.coupling.abs() < 1e-2 * mid.coupling.abs());
}
