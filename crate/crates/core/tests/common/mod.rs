#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use linspec::tolerances::{DEFAULT_RMAX, DEFAULT_TOL, PROFILE_STEP};
use linspec::{solve_ground_state, QProfile, RadialGrid};

/// Ground state at the default settings, solved once per test binary.
pub fn profile() -> Arc<QProfile> {
    static CELL: OnceLock<Arc<QProfile>> = OnceLock::new();
    Arc::clone(CELL.get_or_init(|| {
        let grid = RadialGrid::uniform(PROFILE_STEP, DEFAULT_RMAX).unwrap();
        Arc::new(solve_ground_state(DEFAULT_TOL, &grid).unwrap())
    }))
}

/// Composite Simpson rule on uniform samples (even number of intervals).
pub fn simpson(h: f64, f: &[f64]) -> f64 {
    assert!(f.len() % 2 == 1, "Simpson needs an even number of intervals");
    let n = f.len() - 1;
    let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 * f[i] } else { 2.0 * f[i] }).sum();
    h / 3.0 * (f[0] + inner + f[n])
}
