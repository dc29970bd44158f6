//! Threshold analysis at `λ = 1`, Sturm zero bookkeeping, and the integral
//! identity satisfied by the non-radial components of a zero mode.
//!
//! The threshold solution of coupling `c` and offset `ε = 1 - λ` is
//!
//! `F'' = (ε - c Q²) F`,  `F(0) = 0`, `F'(0) = -1`.
//!
//! At `ε = 0` it is eventually linear, `F ≈ s r + d`; a nonzero slope `s`
//! means the threshold is neither an eigenvalue nor a resonance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::QProfile;
use crate::hermite::gauss_legendre;
use crate::ode::{integrate, RadialGrid, RadialSolution};
use crate::operators::{coupling_coefficient, OperatorSpec};
use crate::spectral::regular_solution;
use crate::tolerances::{COMPARISON_SLACK, FIT_RESIDUAL_FACTOR, MAX_BISECTION, NONRADIAL_REL, SAMPLE_STEP};

/// Exponents of the weight `(1 + r)^{-γ}` in the weighted-norm table.
pub const WEIGHT_EXPONENTS: [i32; 4] = [0, 1, 2, 3];

/// Solves the threshold equation on `SAMPLE_STEP` nodes of `(0, r_max]`.
/// `ε` may exceed 1 when the solution is used for zero comparisons below
/// the threshold.
pub fn threshold_solution(profile: &QProfile, coupling: f64, epsilon: f64, tol: f64) -> Result<RadialSolution> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() || !coupling.is_finite() {
        return Err(Error::Domain(format!(
            "threshold solution needs finite c and ε >= 0, got c = {coupling}, ε = {epsilon}"
        )));
    }
    let grid = RadialGrid::uniform(SAMPLE_STEP, profile.r_max())?;
    integrate(|r| epsilon - coupling * profile.q_squared(r), (0.0, -1.0), &grid, tol)?.into_complete()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    NoResonance,
    ResonanceSuspected,
    Inconclusive,
}

/// Truncated weighted norms `4π ∫₀^R |ψ|² (1+r)^{-γ} r² dr` at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormRow {
    pub radius: f64,
    /// One entry per exponent in [`WEIGHT_EXPONENTS`].
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceResult {
    pub coupling: f64,
    /// Least-squares slope of `F₀` on `[2 r_max/3, r_max]`.
    pub tail_slope: f64,
    pub tail_intercept: f64,
    /// Largest deviation of `F₀` from the fitted line on the fit window.
    pub fit_residual: f64,
    pub slope_threshold: f64,
    pub classification: Classification,
    pub weighted_norms: Vec<WeightedNormRow>,
}

impl ResonanceResult {
    /// Growth factor of each weighted-norm column between the last two rows.
    pub fn doubling_ratios(&self) -> Vec<f64> {
        match self.weighted_norms.as_slice() {
            [.., a, b] => a.values.iter().zip(&b.values).map(|(x, y)| y / x).collect(),
            _ => Vec::new(),
        }
    }
}

/// Classification rule: the slope must clear `slope_threshold` and the fit
/// must be tight relative to `|slope| r_max`. A tight fit with a small slope
/// is a suspected resonance; anything else is inconclusive.
pub fn classify(slope: f64, fit_residual: f64, r_max: f64, slope_threshold: f64) -> Classification {
    let tight = |s: f64| fit_residual < FIT_RESIDUAL_FACTOR * s * r_max;
    if slope.abs() > slope_threshold && tight(slope.abs()) {
        Classification::NoResonance
    } else if slope.abs() <= slope_threshold && tight(slope_threshold) {
        Classification::ResonanceSuspected
    } else {
        Classification::Inconclusive
    }
}

/// Threshold verdict for the scalar operator of coupling `c`.
pub fn resonance_verdict(profile: &QProfile, coupling: f64, tol: f64, slope_threshold: f64) -> Result<ResonanceResult> {
    let sol = threshold_solution(profile, coupling, 0.0, tol)?;
    let r_max = profile.r_max();
    let (tail_slope, tail_intercept, fit_residual) = tail_fit(&sol, 2.0 * r_max / 3.0);
    let classification = classify(tail_slope, fit_residual, r_max, slope_threshold);
    let weighted_norms = [0.25, 0.5, 1.0]
        .iter()
        .map(|f| {
            let radius = f * r_max;
            WeightedNormRow { radius, values: weighted_norms(&sol, radius) }
        })
        .collect();
    Ok(ResonanceResult {
        coupling,
        tail_slope,
        tail_intercept,
        fit_residual,
        slope_threshold,
        classification,
        weighted_norms,
    })
}

/// Least-squares line through the samples with `r >= from`.
fn tail_fit(sol: &RadialSolution, from: f64) -> (f64, f64, f64) {
    let pts: Vec<(f64, f64)> = sol
        .grid()
        .nodes()
        .iter()
        .zip(sol.u())
        .filter(|(r, _)| **r >= from)
        .map(|(r, u)| (*r, *u))
        .collect();
    let n = pts.len() as f64;
    let mean_r = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_u = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_r) * (p.1 - mean_u)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_r).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_u - slope * mean_r;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    (slope, intercept, residual)
}

fn weighted_norms(sol: &RadialSolution, radius: f64) -> Vec<f64> {
    let four_pi = 4.0 * std::f64::consts::PI;
    WEIGHT_EXPONENTS
        .iter()
        .map(|&gamma| four_pi * sol.interpolant().integrate(0.0, radius, |r, u, _| u * u * (1.0 + r).powi(-gamma)))
        .collect()
}

/// Detector check: a coupling tuned until the threshold slope vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticControl {
    pub coupling: f64,
    pub verdict: ResonanceResult,
    pub pass: bool,
}

/// Bisects the coupling in `(0, 1)` for the sign change of the threshold
/// slope (which is `-1` at `c = 0`), then re-runs the verdict there. The
/// control passes if the verdict flips to a suspected resonance.
pub fn synthetic_control(profile: &QProfile, tol: f64, slope_threshold: f64) -> Result<SyntheticControl> {
    let slope = |c: f64| -> Result<f64> {
        let sol = threshold_solution(profile, c, 0.0, tol)?;
        Ok(tail_fit(&sol, 2.0 * profile.r_max() / 3.0).0)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let s_lo = slope(lo)?;
    if s_lo.signum() == slope(hi)?.signum() {
        return Err(Error::BracketNotFound { lo, hi });
    }
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid)?.signum() == s_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let coupling = 0.5 * (lo + hi);
    let verdict = resonance_verdict(profile, coupling, tol, slope_threshold)?;
    let pass = verdict.classification == Classification::ResonanceSuspected;
    Ok(SyntheticControl { coupling, verdict, pass })
}

/// Pointwise comparison of the shifted solutions `F` and `G_*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCheck {
    pub epsilon: f64,
    /// First zero of `F_ε`.
    pub r_eps: f64,
    /// `min (F - G_*)` over the common range.
    pub min_difference: f64,
    /// `min_{r >= 1} G_*(r) / r`.
    pub shifted_minimum: f64,
    pub pass: bool,
}

/// First zero of `G'' = -3 Q² G, G(0) = 0, G'(0) = -1`, and the solution.
fn reference_solution(profile: &QProfile, tol: f64) -> Result<(RadialSolution, Vec<f64>)> {
    let g = threshold_solution(profile, 3.0, 0.0, tol)?;
    let zeros = g.zeros();
    Ok((g, zeros))
}

/// `F(r) = F_ε(r + r_ε)/F_ε'(r_ε) ≥ G_*(r) = G(r + r_*)/G'(r_*)` on
/// `[0, r_max - max(r_ε, r_*)]` within `COMPARISON_SLACK`.
pub fn shifted_comparison(profile: &QProfile, beta: f64, epsilon: f64, tol: f64) -> Result<ComparisonCheck> {
    let c = coupling_coefficient(beta)?;
    let (g, g_zeros) = reference_solution(profile, tol)?;
    let f = threshold_solution(profile, c, epsilon, tol)?;
    let r_star = *g_zeros.first().ok_or_else(|| Error::Numeric("reference solution has no zero".into()))?;
    let r_eps = *f
        .zeros()
        .first()
        .ok_or_else(|| Error::Numeric(format!("threshold solution at ε = {epsilon} has no zero")))?;
    Ok(compare_shifted(&f, r_eps, &g, r_star, epsilon, profile.r_max()))
}

fn compare_shifted(f: &RadialSolution, r_eps: f64, g: &RadialSolution, r_star: f64, epsilon: f64, r_max: f64) -> ComparisonCheck {
    let f_slope = f.eval(r_eps).1;
    let g_slope = g.eval(r_star).1;
    let span = r_max - r_eps.max(r_star);
    let n = (span / SAMPLE_STEP).floor() as usize;
    let mut min_difference = f64::INFINITY;
    let mut shifted_minimum = f64::INFINITY;
    for k in 0..=n {
        let r = k as f64 * SAMPLE_STEP;
        let fv = f.eval(r + r_eps).0 / f_slope;
        let gv = g.eval(r + r_star).0 / g_slope;
        min_difference = min_difference.min(fv - gv);
        if r >= 1.0 {
            shifted_minimum = shifted_minimum.min(gv / r);
        }
    }
    ComparisonCheck {
        epsilon,
        r_eps,
        min_difference,
        shifted_minimum,
        pass: min_difference >= -COMPARISON_SLACK && shifted_minimum > 0.0,
    }
}

/// Zero bookkeeping of the threshold argument for one mixing parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SturmRecord {
    pub beta: f64,
    /// Unique zero of the coupling-3 reference solution `G`.
    pub r_star: Option<f64>,
    /// Number of zeros of `G` on `(0, r_max)`.
    pub reference_zeros: usize,
    /// First zero of `F₀`.
    pub r_zero: Option<f64>,
    /// `(ε, r_ε)` for each probed offset.
    pub r_eps: Vec<(f64, Option<f64>)>,
    pub comparisons: Vec<ComparisonCheck>,
    /// `min_{r >= 1} G_*(r)/r` over all comparisons.
    pub shifted_minimum: Option<f64>,
    pub ordering_ok: bool,
    pub pass: bool,
}

/// Locates every zero in the argument, checks `r_* ≤ r₀ ≤ r_ε` and the
/// shifted comparison at `ε = 0` and at each `ε = f (1 - λ_β)`.
pub fn sturm_record(profile: &QProfile, beta: f64, ground_eigenvalue: f64, fractions: &[f64], tol: f64) -> Result<SturmRecord> {
    let c = coupling_coefficient(beta)?;
    let (g, g_zeros) = reference_solution(profile, tol)?;
    let r_star = g_zeros.first().copied();
    let single_reference_zero = g_zeros.len() == 1;
    let r_max = profile.r_max();

    let mut comparisons = Vec::with_capacity(fractions.len() + 1);
    let mut zeros = Vec::with_capacity(fractions.len() + 1);
    for eps in std::iter::once(0.0).chain(fractions.iter().map(|f| f * (1.0 - ground_eigenvalue))) {
        let f = threshold_solution(profile, c, eps, tol)?;
        let z = f.zeros().first().copied();
        if let (Some(z), Some(rs), true) = (z, r_star, single_reference_zero) {
            comparisons.push(compare_shifted(&f, z, &g, rs, eps, r_max));
        }
        zeros.push((eps, z));
    }
    let r_zero = zeros[0].1;
    let r_eps: Vec<(f64, Option<f64>)> = zeros[1..].to_vec();

    let ordering_ok = match (r_star, r_zero) {
        (Some(rs), Some(r0)) => {
            single_reference_zero
                && rs <= r0
                && r_eps.iter().all(|(_, z)| z.is_some_and(|z| r0 <= z))
                && r_eps.windows(2).all(|w| w[0].1 <= w[1].1)
        }
        _ => false,
    };
    let shifted_minimum = comparisons.iter().map(|c| c.shifted_minimum).reduce(f64::min);
    let pass = ordering_ok
        && comparisons.len() == fractions.len() + 1
        && comparisons.iter().all(|c| c.pass);
    Ok(SturmRecord {
        beta,
        r_star,
        reference_zeros: g_zeros.len(),
        r_zero,
        r_eps,
        comparisons,
        shifted_minimum,
        ordering_ok,
        pass,
    })
}

/// Angular momentum of the `k`-th spherical harmonic in the ordering
/// `μ₀ = 0 < μ₁ = μ₂ = μ₃ = 2 < μ₄ = ... = 6 < ...`.
pub fn sector_ell(k: u32) -> u32 {
    (k as f64).sqrt().floor() as u32
}

/// Term-by-term evaluation of the identity obtained by multiplying the
/// sector equation at `λ = 0` by `Q' r²` and integrating over `(0, ρ)`:
///
/// `ρ² ψ'(ρ) Q'(ρ) - ρ² Q''(ρ) ψ(ρ) + (2 - μ) ∫ Q' ψ dr
///   - 4β/(1+β) ∫ Q² Q' ψ r² dr = 0`.
///
/// The second boundary term vanishes when `ρ` is a zero of `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonradialIdentity {
    pub beta: f64,
    pub sector_index: u32,
    pub mu: f64,
    pub rho: f64,
    /// `ψ` has no zero before `r_max`, so `ρ = r_max`.
    pub rho_is_cutoff: bool,
    /// `ρ² ψ'(ρ) Q'(ρ)`.
    pub boundary: f64,
    /// `-ρ² Q''(ρ) ψ(ρ)`.
    pub boundary_correction: f64,
    /// `(2 - μ) ∫₀^ρ Q' ψ dr`.
    pub centrifugal: f64,
    /// `-4β/(1+β) ∫₀^ρ Q² Q' ψ r² dr`.
    pub coupling: f64,
    pub residual: f64,
    pub relative_residual: f64,
    /// `boundary ≥ 0`, `centrifugal ≥ 0`, `coupling > 0`.
    pub signs_as_claimed: bool,
    /// Small residual and the sign pattern as claimed.
    pub pass: bool,
    /// Small residual, sign-definite integrals with the claimed signs, and
    /// either a genuine zero with `boundary ≥ 0` or a solution that never
    /// vanishes (and so cannot be a decaying zero mode).
    pub consistent: bool,
}

pub fn nonradial_identity(profile: &QProfile, beta: f64, sector_index: u32, tol: f64) -> Result<NonradialIdentity> {
    if sector_index == 0 {
        return Err(Error::Domain("non-radial identity needs sector index >= 1".into()));
    }
    let ell = sector_ell(sector_index);
    let c = coupling_coefficient(beta)?;
    let op = OperatorSpec::new(c, ell, std::sync::Arc::new(profile.clone()))?;
    let sol = regular_solution(&op, 0.0, tol)?.into_complete()?;
    let mu = op.sector();
    if !(sol.u()[0] > 0.0) {
        return Err(Error::Numeric("sector solution does not start positive".into()));
    }
    let zeros = sol.zeros();
    let (rho, rho_is_cutoff) = match zeros.first() {
        Some(&z) => (z, false),
        None => (profile.r_max(), true),
    };
    let psi = |r: f64| {
        let (u, du) = sol.eval(r);
        (u / r, (du - u / r) / r)
    };
    let (psi_rho, dpsi_rho) = psi(rho);
    let [_, dq_rho, ddq_rho] = profile.interpolant().eval(rho);
    let boundary = rho * rho * dpsi_rho * dq_rho;
    let boundary_correction = if rho_is_cutoff { -rho * rho * ddq_rho * psi_rho } else { 0.0 };

    // Quadrature on the sample intervals of ψ, with u/r in place of ψ.
    let nodes: Vec<f64> = std::iter::once(0.0)
        .chain(sol.grid().nodes().iter().copied().filter(|&r| r < rho))
        .chain(std::iter::once(rho))
        .collect();
    let (mut first, mut second) = (0.0, 0.0);
    for w in nodes.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        first += gauss_legendre(w[0], w[1], |r| {
            let dq = profile.q_at(r).dq;
            dq * sol.eval(r).0 / r
        });
        second += gauss_legendre(w[0], w[1], |r| {
            let p = profile.q_at(r);
            p.q * p.q * p.dq * sol.eval(r).0 * r
        });
    }
    let centrifugal = (2.0 - mu) * first;
    let coupling = -4.0 * beta / (1.0 + beta) * second;
    let residual = boundary + boundary_correction + centrifugal + coupling;
    let scale = [boundary, boundary_correction, centrifugal, coupling]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let relative_residual = residual.abs() / scale;
    let signs_as_claimed = boundary >= 0.0 && centrifugal >= 0.0 && coupling > 0.0;
    Ok(NonradialIdentity {
        beta,
        sector_index,
        mu,
        rho,
        rho_is_cutoff,
        boundary,
        boundary_correction,
        centrifugal,
        coupling,
        residual,
        relative_residual,
        signs_as_claimed,
        pass: relative_residual < NONRADIAL_REL && signs_as_claimed,
        consistent: relative_residual < NONRADIAL_REL
            && centrifugal >= 0.0
            && coupling > 0.0
            && (rho_is_cutoff || boundary >= 0.0),
    })
}
