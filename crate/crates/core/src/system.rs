//! Checks on the coupled system
//!
//! `-Δu₁ + u₁ - u₁³ - β u₁ u₂² = 0`,  `-Δu₂ + u₂ - u₂³ - β u₁² u₂ = 0`
//!
//! at its explicit radial solutions, all of which are multiples of `Q`.
//! Integrals over ℝ³ are `4π ∫₀^∞ f r² dr`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::QProfile;
use crate::operators::{coupling_coefficient, fd_error_bound};
use crate::tolerances::NEHARI_REL;

/// A pair `(a₁ Q, a₂ Q)` sampled on the profile grid.
#[derive(Debug, Clone)]
pub struct CandidatePair {
    beta: f64,
    amplitudes: [f64; 2],
    profile: Arc<QProfile>,
}

impl CandidatePair {
    pub fn new(beta: f64, amplitudes: [f64; 2], profile: Arc<QProfile>) -> Result<Self> {
        coupling_coefficient(beta)?;
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("candidate amplitudes must be finite".into()));
        }
        Ok(Self { beta, amplitudes, profile })
    }

    /// The symmetric solution `(Q, Q)/√(1+β)`.
    pub fn symmetric(beta: f64, profile: Arc<QProfile>) -> Result<Self> {
        let a = (1.0 / (1.0 + beta)).sqrt();
        Self::new(beta, [a, a], profile)
    }

    /// The one-component solution `(Q, 0)`.
    pub fn standard(beta: f64, profile: Arc<QProfile>) -> Result<Self> {
        Self::new(beta, [1.0, 0.0], profile)
    }

    pub fn zero(beta: f64, profile: Arc<QProfile>) -> Result<Self> {
        Self::new(beta, [0.0, 0.0], profile)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.beta, [factor * self.amplitudes[0], factor * self.amplitudes[1]], Arc::clone(&self.profile))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn amplitudes(&self) -> [f64; 2] {
        self.amplitudes
    }

    pub fn profile(&self) -> &QProfile {
        &self.profile
    }

    /// Samples of component `i` on the profile grid.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.profile.q().iter().map(|q| self.amplitudes[i] * q).collect()
    }

    /// Both components after `W`.
    pub fn transformed(&self) -> [f64; 2] {
        let [a, b] = self.amplitudes;
        [(a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2]
    }
}

/// Sup-norm residuals of a system on the grid, with their error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualCheck {
    pub residual: [f64; 2],
    pub bound: [f64; 2],
    pub pass: bool,
}

/// Finite-difference residual of a radial system in reduced variables
/// `w_i = r u_i`, given the cubic terms as a function of `(u₁, u₂)`.
fn reduced_residual<N>(profile: &QProfile, amplitudes: [f64; 2], nonlinearity: N) -> Result<ResidualCheck>
where
    N: Fn(f64, f64) -> [f64; 2],
{
    let grid = profile.grid();
    let h = grid
        .step()
        .ok_or_else(|| Error::Config("system residuals need a uniform profile grid".into()))?;
    let nodes = grid.nodes();
    let q = profile.q();
    let w: [Vec<f64>; 2] =
        [0, 1].map(|i| nodes.iter().zip(q).map(|(r, q)| r * amplitudes[i] * q).collect());
    let mut residual = [0.0f64; 2];
    for k in 0..nodes.len() - 1 {
        let (u1, u2) = (amplitudes[0] * q[k], amplitudes[1] * q[k]);
        let cubic = nonlinearity(u1, u2);
        for i in 0..2 {
            let left = if k == 0 { 0.0 } else { w[i][k - 1] };
            let d2 = (w[i][k + 1] - 2.0 * w[i][k] + left) / (h * h);
            let res = -d2 + w[i][k] - nodes[k] * cubic[i];
            residual[i] = residual[i].max(res.abs());
        }
    }
    let bound = [fd_error_bound(&w[0], h), fd_error_bound(&w[1], h)];
    let pass = residual[0] <= bound[0] && residual[1] <= bound[1];
    Ok(ResidualCheck { residual, bound, pass })
}

/// Residual of the coupled system at `pair`.
pub fn system_residual(pair: &CandidatePair) -> Result<ResidualCheck> {
    let beta = pair.beta;
    reduced_residual(&pair.profile, pair.amplitudes, |u1, u2| {
        [u1 * u1 * u1 + beta * u1 * u2 * u2, u2 * u2 * u2 + beta * u1 * u1 * u2]
    })
}

/// Residual of the rotated system satisfied by `(v₁, v₂) = W (u₁, u₂)`, at
/// the image `(√(2/(1+β)) Q, 0)` of the symmetric solution.
pub fn transformed_residual(profile: Arc<QProfile>, beta: f64) -> Result<ResidualCheck> {
    coupling_coefficient(beta)?;
    let amplitudes = [(2.0 / (1.0 + beta)).sqrt(), 0.0];
    reduced_residual(&profile, amplitudes, |v1, v2| {
        let (p, m) = (v1 + v2, v1 - v2);
        let mixed = 0.5 * beta * (v1 * v1 - v2 * v2);
        [0.25 * (p.powi(3) + m.powi(3)) + mixed * v1, 0.25 * (p.powi(3) - m.powi(3)) - mixed * v2]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NehariSet {
    /// One constraint per component.
    Componentwise,
    /// The summed constraint.
    Summed,
}

/// `∫(|∇u|² + u²) = ∫(quartic)` for one constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kinetic: f64,
    pub quartic: f64,
    pub relative_residual: f64,
    pub holds: bool,
}

/// Integrals of `Q` shared by every candidate: `∫(Q'² + Q²)` and `∫Q⁴`
/// over ℝ³.
fn base_integrals(profile: &QProfile) -> Result<(f64, f64)> {
    let kinetic = 4.0 * PI * profile.q_quadrature(|q, dq, _| dq * dq + q * q)?;
    let quartic = 4.0 * PI * profile.q_quadrature(|q, _, _| q.powi(4))?;
    Ok((kinetic, quartic))
}

fn constraint(kinetic: f64, quartic: f64) -> Constraint {
    let scale = kinetic.abs().max(quartic.abs());
    let relative_residual = if scale == 0.0 { 0.0 } else { (kinetic - quartic).abs() / scale };
    Constraint { kinetic, quartic, relative_residual, holds: relative_residual < NEHARI_REL }
}

pub fn nehari_membership(pair: &CandidatePair, set: NehariSet) -> Result<Vec<Constraint>> {
    let [a1, a2] = pair.amplitudes;
    let beta = pair.beta;
    let (k, p) = base_integrals(&pair.profile)?;
    match set {
        NehariSet::Componentwise => {
            if a1 == 0.0 || a2 == 0.0 {
                return Err(Error::Domain("componentwise constraint needs both components nonzero".into()));
            }
            Ok(vec![
                constraint(a1 * a1 * k, (a1.powi(4) + beta * a1 * a1 * a2 * a2) * p),
                constraint(a2 * a2 * k, (a2.powi(4) + beta * a1 * a1 * a2 * a2) * p),
            ])
        }
        NehariSet::Summed => {
            if a1 == 0.0 && a2 == 0.0 {
                return Err(Error::Domain("summed constraint needs a nonzero pair".into()));
            }
            Ok(vec![constraint(
                (a1 * a1 + a2 * a2) * k,
                (a1.powi(4) + a2.powi(4) + 2.0 * beta * a1 * a1 * a2 * a2) * p,
            )])
        }
    }
}

/// Energy `½ ∫ Σ(|∇uᵢ|² + uᵢ²) - ¼ ∫(u₁⁴ + u₂⁴ + 2β u₁² u₂²)`.
pub fn energy(pair: &CandidatePair) -> Result<f64> {
    let [a1, a2] = pair.amplitudes;
    let (k, p) = base_integrals(&pair.profile)?;
    Ok(0.5 * (a1 * a1 + a2 * a2) * k - 0.25 * (a1.powi(4) + a2.powi(4) + 2.0 * pair.beta * a1 * a1 * a2 * a2) * p)
}

/// Jacobian of the cubic terms at `pair`, sampled on the profile grid:
/// `[[3u₁² + βu₂², 2βu₁u₂], [2βu₁u₂, 3u₂² + βu₁²]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

pub fn linearization_matrix(pair: &CandidatePair) -> Linearization {
    let beta = pair.beta;
    let u1 = pair.component(0);
    let u2 = pair.component(1);
    let first = u1.iter().zip(&u2).map(|(a, b)| 3.0 * a * a + beta * b * b).collect();
    let second = u1.iter().zip(&u2).map(|(a, b)| 3.0 * b * b + beta * a * a).collect();
    let off_diagonal = u1.iter().zip(&u2).map(|(a, b)| 2.0 * beta * a * b).collect();
    Linearization { first, second, off_diagonal }
}

/// `W J W` for a symmetric 2×2 `J`.
pub fn conjugate(j: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let (a, b, d) = (j[0][0], j[0][1], j[1][1]);
    [[0.5 * (a + 2.0 * b + d), 0.5 * (a - d)], [0.5 * (a - d), 0.5 * (a - 2.0 * b + d)]]
}

/// Largest deviation, in units of `Q²`, of the conjugated linearization at
/// the symmetric solution from `diag(3, (3-β)/(1+β))`.
pub fn chain_discrepancy(pair: &CandidatePair) -> Result<f64> {
    let c = coupling_coefficient(pair.beta)?;
    let lin = linearization_matrix(pair);
    let mut worst = 0.0f64;
    for (k, q) in pair.profile.q().iter().enumerate() {
        let q2 = q * q;
        if q2 < f64::MIN_POSITIVE {
            continue;
        }
        let m = conjugate([
            [lin.first[k] / q2, lin.off_diagonal[k] / q2],
            [lin.off_diagonal[k] / q2, lin.second[k] / q2],
        ]);
        worst = worst
            .max((m[0][0] - 3.0).abs())
            .max((m[1][1] - c).abs())
            .max(m[0][1].abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_of_symmetric_coupling() {
        let beta = 0.5;
        let s = 1.0 / (1.0 + beta);
        let j = [[(3.0 + beta) * s, 2.0 * beta * s], [2.0 * beta * s, (3.0 + beta) * s]];
        let m = conjugate(j);
        assert!((m[0][0] - 3.0).abs() < 1e-15);
        assert!((m[1][1] - (3.0 - beta) * s).abs() < 1e-15);
        assert_eq!(m[0][1], 0.0);
    }

    #[test]
    fn conjugation_is_involutive() {
        let j = [[1.3, -0.2], [-0.2, 0.7]];
        let back = conjugate(conjugate(j));
        for i in 0..2 {
            for k in 0..2 {
                assert!((back[i][k] - j[i][k]).abs() < 1e-15);
            }
        }
    }
}
