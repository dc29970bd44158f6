//! Dormand-Prince 5(4) stepper for two-component first-order systems.
//!
//! The stepper lands exactly on every requested output radius, so sampled
//! solutions carry full integrator accuracy at the nodes.

use crate::error::{Error, Result};
use crate::tolerances::BLOW_UP;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub(crate) type State = [f64; 2];

/// Why a run ended before its last target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RunEnd {
    Finished,
    /// The visitor asked to stop at this radius.
    Stopped(f64),
    /// |y| exceeded the overflow threshold; carries the last radius reached.
    BlowUp(f64),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dopri5 {
    rtol: f64,
    max_step: f64,
}

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

#[inline]
fn norm(y: &State) -> f64 {
    y[0].abs().max(y[1].abs())
}

impl Dopri5 {
    pub(crate) fn new(rtol: f64) -> Self {
        Self { rtol, max_step: 0.25 }
    }

    /// Integrates `y' = f(r, y)` from `(r0, y0)` through `targets` in order.
    ///
    /// `targets` must be monotone in the direction of integration. `visit` is
    /// called with each target radius and state; returning `false` stops the
    /// run.
    pub(crate) fn run<F, V>(
        &self,
        f: F,
        r0: f64,
        y0: State,
        targets: &[f64],
        mut visit: V,
    ) -> Result<RunEnd>
    where
        F: Fn(f64, &State) -> State,
        V: FnMut(f64, &State) -> bool,
    {
        let mut r = r0;
        let mut y = y0;
        let mut k1 = f(r, &y);
        let mut h_prop = f64::NAN;
        let mut rejects = 0usize;

        for &target in targets {
            let span = target - r;
            if span == 0.0 {
                if !visit(r, &y) {
                    return Ok(RunEnd::Stopped(r));
                }
                continue;
            }
            let dir = span.signum();
            if h_prop.is_nan() {
                h_prop = (span.abs() * 0.1).clamp(1e-8, 1e-3);
            }
            loop {
                let remaining = (target - r).abs();
                if remaining == 0.0 {
                    break;
                }
                let truncated = h_prop.min(self.max_step) >= remaining;
                let h_abs = if truncated { remaining } else { h_prop.min(self.max_step) };
                let h = dir * h_abs;

                let k2 = f(r + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
                let k3 = f(r + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
                let k4 = f(
                    r + C4 * h,
                    &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
                );
                let k5 = f(
                    r + C5 * h,
                    &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                );
                let k6 = f(
                    r + h,
                    &axpy(
                        &y,
                        h,
                        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    ),
                );
                let r_new = if truncated { target } else { r + h };
                let y_new = axpy(
                    &y,
                    h,
                    &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                );
                let k7 = f(r_new, &y_new);

                let mut e = [0.0; 2];
                for i in 0..2 {
                    e[i] = h
                        * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                            + E7 * k7[i]);
                }
                let scale = self.rtol * norm(&y).max(norm(&y_new)).max(f64::MIN_POSITIVE);
                let err = norm(&e) / scale;

                if !err.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
                    if norm(&y) > BLOW_UP * 1e-10 {
                        return Ok(RunEnd::BlowUp(r));
                    }
                    h_prop = h_abs * 0.2;
                    rejects += 1;
                } else if err <= 1.0 {
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    let proposal = h_abs * fac;
                    // A step shortened to hit a node says nothing about the
                    // natural step size, so never let it shrink the proposal.
                    h_prop = if truncated { proposal.max(h_prop) } else { proposal };
                    r = r_new;
                    y = y_new;
                    k1 = k7;
                    rejects = 0;
                    if norm(&y) > BLOW_UP {
                        return Ok(RunEnd::BlowUp(r));
                    }
                } else {
                    h_prop = h_abs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    rejects += 1;
                }
                if rejects > 60 || h_prop < 1e-15 * r.abs().max(1.0) {
                    return Err(Error::Numeric(format!(
                        "step size underflow at r = {r:e}"
                    )));
                }
            }
            if !visit(r, &y) {
                return Ok(RunEnd::Stopped(r));
            }
        }
        Ok(RunEnd::Finished)
    }
}
