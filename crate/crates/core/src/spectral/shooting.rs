//! Shooting eigen-engine: bisection on the normalized Wronskian of the
//! regular solution from the origin and the decaying solution from `r_max`.

use crate::error::Result;
use crate::ode::{origin_start, Dopri5, RadialGrid, RadialSolution, RunEnd, State};
use crate::operators::OperatorSpec;
use crate::tolerances::{MAX_BISECTION, ORIGIN_START, SAMPLE_STEP};

/// Matching radius: the outermost point where the solution turns from
/// oscillatory to evanescent, kept inside `[1, r_max / 2]`.
fn matching_radius(op: &OperatorSpec, lambda: f64) -> f64 {
    let r_max = op.r_max();
    let mut r_turn = 1.0;
    let mut r = 0.05;
    while r < 0.5 * r_max {
        if op.weight(r, lambda) < 0.0 {
            r_turn = r;
        }
        r += 0.05;
    }
    r_turn.clamp(1.0, 0.5 * r_max)
}

/// Decay rate of the far-field solution used to seed the inward shot.
fn far_decay(op: &OperatorSpec, lambda: f64) -> f64 {
    op.weight(op.r_max(), lambda).max(0.0).sqrt()
}

/// `(u, u')` of the regular solution at `r_match`.
fn outward(op: &OperatorSpec, lambda: f64, r_match: f64, tol: f64) -> Result<State> {
    let start = origin_start(&op.origin_series(lambda), 1.0, ORIGIN_START)?;
    let rhs = |r: f64, y: &State| [y[1], op.weight(r, lambda) * y[0]];
    let mut out = [f64::NAN; 2];
    Dopri5::new(tol).run(rhs, start.r, [start.u, start.du], &[r_match], |_, y| {
        out = *y;
        true
    })?;
    Ok(out)
}

/// `(u, u')` at `r_match` of the solution with `u = 1, u' = -κ` at `r_max`.
fn inward(op: &OperatorSpec, lambda: f64, r_match: f64, tol: f64) -> Result<State> {
    let kappa = far_decay(op, lambda);
    let rhs = |r: f64, y: &State| [y[1], op.weight(r, lambda) * y[0]];
    let mut out = [f64::NAN; 2];
    Dopri5::new(tol).run(rhs, op.r_max(), [1.0, -kappa], &[r_match], |_, y| {
        out = *y;
        true
    })?;
    Ok(out)
}

/// `W(u_L, u_R) / (|y_L| |y_R|)` at the matching radius.
pub fn mismatch(op: &OperatorSpec, lambda: f64, tol: f64) -> Result<f64> {
    let r_match = matching_radius(op, lambda);
    let left = outward(op, lambda, r_match, tol)?;
    let right = inward(op, lambda, r_match, tol)?;
    let w = left[0] * right[1] - left[1] * right[0];
    Ok(w / (left[0].hypot(left[1]) * right[0].hypot(right[1])))
}

/// Bisection on [`mismatch`]. `None` when the bracket holds no sign change.
pub(crate) fn bisect(op: &OperatorSpec, lo: f64, hi: f64, tol: f64, lambda_tol: f64) -> Result<Option<(f64, f64)>> {
    let (mut lo, mut hi) = (lo, hi);
    let m_lo = mismatch(op, lo, tol)?;
    let m_hi = mismatch(op, hi, tol)?;
    if m_lo == 0.0 {
        return Ok(Some((lo, 0.0)));
    }
    if m_hi == 0.0 {
        return Ok(Some((hi, 0.0)));
    }
    if m_lo.signum() == m_hi.signum() {
        return Ok(None);
    }
    for _ in 0..MAX_BISECTION {
        if hi - lo <= lambda_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let m = mismatch(op, mid, tol)?;
        if m == 0.0 {
            return Ok(Some((mid, 0.0)));
        }
        if m.signum() == m_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((0.5 * (lo + hi), 0.5 * (hi - lo))))
}

/// Eigenfunction assembled from the two shots at `lambda`, sampled every
/// `SAMPLE_STEP`, with unit `∫u² dr` and positive initial slope.
pub(crate) fn eigenfunction(op: &OperatorSpec, lambda: f64, tol: f64) -> Result<RadialSolution> {
    let grid = RadialGrid::uniform(SAMPLE_STEP, op.r_max())?;
    let nodes = grid.nodes();
    // Off the sample grid so that no target repeats.
    let r_match = matching_radius(op, lambda) + 0.5 * SAMPLE_STEP;
    let split = nodes.partition_point(|&r| r < r_match);
    let rhs = |r: f64, y: &State| [y[1], op.weight(r, lambda) * y[0]];

    let start = origin_start(&op.origin_series(lambda), 1.0, ORIGIN_START)?;
    let mut left = Vec::with_capacity(split);
    let mut targets = nodes[..split].to_vec();
    targets.push(r_match);
    Dopri5::new(tol).run(rhs, start.r, [start.u, start.du], &targets, |_, y| {
        left.push(*y);
        true
    })?;
    let at_match_left = left.pop().unwrap();

    let kappa = far_decay(op, lambda);
    let mut right = Vec::with_capacity(nodes.len() - split);
    let mut targets: Vec<f64> = nodes[split..].iter().rev().copied().collect();
    targets.push(r_match);
    // The first target is r_max itself, where the seed is exact.
    let end = Dopri5::new(tol).run(rhs, op.r_max(), [1.0, -kappa], &targets[1..], |_, y| {
        right.push(*y);
        true
    })?;
    debug_assert!(matches!(end, RunEnd::Finished));
    let at_match_right = right.pop().unwrap();
    right.reverse();
    right.push([1.0, -kappa]);

    let scale = if at_match_right[0].abs() > 0.0 {
        at_match_left[0] / at_match_right[0]
    } else {
        at_match_left[1] / at_match_right[1]
    };
    let samples: Vec<State> = left
        .into_iter()
        .chain(right.into_iter().map(|y| [scale * y[0], scale * y[1]]))
        .collect();
    let u: Vec<f64> = samples.iter().map(|y| y[0]).collect();
    let du: Vec<f64> = samples.iter().map(|y| y[1]).collect();
    let ddu: Vec<f64> = nodes.iter().zip(&u).map(|(&r, v)| op.weight(r, lambda) * v).collect();
    let origin = start.origin;
    let raw = RadialSolution::from_samples(grid.clone(), u, du, ddu, origin)?;
    let norm = raw.interpolant().integrate(0.0, op.r_max(), |_, v, _| v * v).sqrt();
    let s = 1.0 / norm;
    let scaled = |v: &[f64]| v.iter().map(|x| x * s).collect::<Vec<f64>>();
    let o = raw.origin();
    RadialSolution::from_samples(grid, scaled(raw.u()), scaled(raw.du()), scaled(raw.ddu()), [o[0] * s, o[1] * s, o[2] * s])
}
