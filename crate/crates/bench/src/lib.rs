//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use linspec::tolerances::{DEFAULT_RMAX, DEFAULT_TOL, PROFILE_STEP};
use linspec::{solve_ground_state, QProfile, RadialGrid};

/// Ground state at the default settings.
pub fn default_profile() -> Arc<QProfile> {
    let grid = RadialGrid::uniform(PROFILE_STEP, DEFAULT_RMAX).expect("default grid");
    Arc::new(solve_ground_state(DEFAULT_TOL, &grid).expect("default ground state"))
}
