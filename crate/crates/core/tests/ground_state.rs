mod common;

use linspec::ground_state::load_or_solve;
use linspec::tolerances::{DEFAULT_TOL, PROFILE_STEP};
use linspec::{solve_ground_state, RadialGrid};

#[test]
fn tail_amplitude_is_stable_under_truncation() {
    let long = common::profile();
    let grid = RadialGrid::uniform(PROFILE_STEP, 25.0).unwrap();
    let short = solve_ground_state(DEFAULT_TOL, &grid).unwrap();
    let (a, b) = (long.tail_amplitude(), short.tail_amplitude());
    assert!(a > 0.0 && a.is_finite());
    assert!((a - b).abs() < 0.01 * a, "tail amplitude {a} vs {b}");
    assert!((long.center_value() - short.center_value()).abs() < 1e-9);
}

#[test]
fn ground_state_has_no_nodes() {
    let q = common::profile();
    assert_eq!(q.node_count(), 0);
    assert!(q.q().iter().all(|v| *v > 0.0));
}

#[test]
fn origin_and_nodes() {
    let q = common::profile();
    let p = q.q_at(0.0);
    assert_eq!(p.q, q.center_value());
    assert_eq!(p.dq, 0.0);
    for i in [1, 17, 400, 4000] {
        let r = q.grid().nodes()[i];
        assert_eq!(q.q_at(r).q, q.q()[i]);
    }
}

#[test]
fn midpoints_match_refined_solve() {
    let coarse = common::profile();
    let grid = RadialGrid::uniform(PROFILE_STEP / 2.0, coarse.r_max()).unwrap();
    let fine = solve_ground_state(DEFAULT_TOL, &grid).unwrap();
    let nodes = coarse.grid().nodes();
    let mut worst = 0.0f64;
    for i in (0..nodes.len() - 1).step_by(7) {
        let mid = 0.5 * (nodes[i] + nodes[i + 1]);
        // Node i sits at (i + 1) h, so the midpoint is refined node 2i + 2.
        let reference = fine.q()[2 * i + 2];
        worst = worst.max((coarse.q_at(mid).q - reference).abs());
    }
    assert!(worst < 1e-9, "midpoint deviation {worst:e}");
}

#[test]
fn quartic_integral_matches_simpson_on_refined_grid() {
    let coarse = common::profile();
    let grid = RadialGrid::uniform(PROFILE_STEP / 2.0, coarse.r_max()).unwrap();
    let fine = solve_ground_state(DEFAULT_TOL, &grid).unwrap();
    let h = fine.grid().step().unwrap();
    let samples: Vec<f64> = std::iter::once(0.0)
        .chain(fine.grid().nodes().iter().zip(fine.q()).map(|(r, q)| q.powi(4) * r * r))
        .collect();
    let oracle = common::simpson(h, &samples);
    let value = coarse.q_quadrature(|q, _, _| q.powi(4)).unwrap();
    assert!(value > 0.0);
    assert!((value - oracle).abs() < 1e-8, "{value} vs {oracle}");
}

#[test]
fn cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.txt");
    let grid = RadialGrid::uniform(0.01, 20.0).unwrap();
    let first = load_or_solve(&path, 1e-9, &grid).unwrap();
    assert!(path.exists());
    let second = load_or_solve(&path, 1e-9, &grid).unwrap();
    assert_eq!(first.q(), second.q());
    assert_eq!(first.center_value().to_bits(), second.center_value().to_bits());
}
