mod common;

use std::sync::Arc;

use linspec::operators::{apply_radial, conjugation_check, fd_error_bound, general_reduction, MatrixOperatorSpec};
use linspec::{OperatorSpec, RadialGrid};

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn ground_state_is_in_the_kernel_of_the_unit_coupling() {
    let q = common::profile();
    let grid = q.grid().clone();
    let h = grid.step().unwrap();
    let u: Vec<f64> = grid.nodes().iter().zip(q.q()).map(|(r, q)| r * q).collect();
    let op = OperatorSpec::new(1.0, 0, Arc::clone(&q)).unwrap();
    let res = apply_radial(&op, &grid, &u, 0.0).unwrap();
    assert!(sup(&res) < fd_error_bound(&u, h), "{} vs {}", sup(&res), fd_error_bound(&u, h));
}

#[test]
fn translation_mode_is_in_the_kernel_of_the_p_wave() {
    let q = common::profile();
    let grid = q.grid().clone();
    let h = grid.step().unwrap();
    let u: Vec<f64> = grid.nodes().iter().zip(q.dq()).map(|(r, d)| r * d).collect();
    let op = OperatorSpec::new(3.0, 1, Arc::clone(&q)).unwrap();
    let res = apply_radial(&op, &grid, &u, 0.0).unwrap();
    // The first node carries the 2/r² singularity against an O(r²) sample.
    assert!(sup(&res) < fd_error_bound(&u, h), "{} vs {}", sup(&res), fd_error_bound(&u, h));
}

#[test]
fn zero_function_has_zero_residual() {
    let q = common::profile();
    let grid = q.grid().clone();
    let op = OperatorSpec::from_beta(0.4, 2, Arc::clone(&q)).unwrap();
    let res = apply_radial(&op, &grid, &vec![0.0; grid.len()], 0.3).unwrap();
    assert!(res.iter().all(|x| *x == 0.0));
}

fn bump(grid: &RadialGrid, centre: f64, width: f64) -> Vec<f64> {
    grid.nodes().iter().map(|r| r * (-((r - centre) / width).powi(2)).exp()).collect()
}

#[test]
fn conjugation_diagonalizes_the_coupled_operator() {
    let q = common::profile();
    let grid = RadialGrid::uniform(1e-3, 15.0).unwrap();
    let a = bump(&grid, 1.5, 0.8);
    let b = bump(&grid, 2.5, 1.1);
    let d = conjugation_check(0.5, &q, &grid, (&a, &b)).unwrap();
    assert!(d < 1e-6, "discrepancy {d:e}");
    let d0 = conjugation_check(0.0, &q, &grid, (&a, &b)).unwrap();
    assert!(d0 < 1e-6, "discrepancy {d0:e}");
}

#[test]
fn symmetric_pair_feeds_only_the_first_channel() {
    let q = common::profile();
    let grid = RadialGrid::uniform(1e-3, 15.0).unwrap();
    let a = bump(&grid, 1.0, 0.7);
    let coupled = MatrixOperatorSpec::coupled(0.3).unwrap();
    let (_, second) = coupled.apply(&q, &grid, (&a, &a)).unwrap();
    let (first, _) = coupled.apply(&q, &grid, (&a, &a)).unwrap();
    // (L φ, L φ) for a symmetric input; the antisymmetric part vanishes.
    let anti = first.iter().zip(&second).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert_eq!(anti, 0.0);
}

#[test]
fn unequal_self_couplings_reduce_by_exact_linear_solve() {
    // 2k + l/2 = 1, k/2 + l = 1
    let (k, l) = (2.0 / 7.0, 6.0 / 7.0);
    let r = general_reduction(2.0, 1.0, 0.5).unwrap();
    assert!((r.k - k).abs() < 1e-15 && (r.l - l).abs() < 1e-15);
    let trace = r.matrix[0][0] + r.matrix[1][1];
    assert!((r.couplings[0] + r.couplings[1] - trace).abs() < 1e-13);
}
