//! Discrete spectra of the scalar radial operators by two independent
//! engines, and the eigenvalue-level checks built on them.

mod shooting;
mod tridiag;

pub use shooting::mismatch;
pub use tridiag::Discretization;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::QProfile;
use crate::ode::{integrate_from, origin_start, Integration, RadialGrid, RadialSolution};
use crate::operators::{coupling_coefficient, OperatorSpec};
use crate::tolerances::{
    DUAL_ENGINE, ENVELOPE_RATIO, GAP_DELTA, ORIGIN_START, RAYLEIGH_ABS, RAYLEIGH_REL, SAMPLE_STEP,
    SHOOTING_TOL,
};

/// Convergence order used to extrapolate matrix eigenvalues in the step.
pub const RICHARDSON_ORDER: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    TridiagonalBisection,
    ShootingMatch,
}

/// One sub-threshold eigenpair.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalue: f64,
    /// Interior zeros of the eigenfunction.
    pub node_count: usize,
    /// `u = r ψ` with unit `∫u² dr` and positive initial slope.
    pub eigenfunction: RadialSolution,
    pub method: EigenMethod,
    pub error_estimate: f64,
}

/// Output of [`eigen_tridiagonal`].
#[derive(Debug, Clone)]
pub struct TridiagonalSpectrum {
    pub eigenpairs: Vec<EigenResult>,
    /// The window was cut back to `1 - δ`.
    pub clipped: bool,
    pub window: (f64, f64),
}

/// All eigenvalues of the discretized operator in `window`, found by Sturm
/// bisection and refined eigenvectors by inverse iteration. The error
/// estimate compares against the same computation at step `2h`.
pub fn eigen_tridiagonal(op: &OperatorSpec, window: (f64, f64), step: f64) -> Result<TridiagonalSpectrum> {
    if !(step > 0.0 && step <= 1e-2) {
        return Err(Error::Config(format!("matrix step must lie in (0, 1e-2], got {step}")));
    }
    let (lo, mut hi) = window;
    if !(lo < hi) {
        return Err(Error::Config(format!("empty spectral window ({lo}, {hi})")));
    }
    let clipped = hi > 1.0 - GAP_DELTA;
    if clipped {
        hi = 1.0 - GAP_DELTA;
    }
    let fine = tridiag::discrete_spectrum(&Discretization::new(op, step)?, lo, hi)?;
    let coarse = tridiag::discrete_spectrum(&Discretization::new(op, 2.0 * step)?, lo, hi)?;
    let factor = (2f64.powi(RICHARDSON_ORDER) - 1.0).recip();
    let eigenpairs = fine
        .into_iter()
        .enumerate()
        .map(|(k, e)| {
            let error_estimate = coarse
                .get(k)
                .map(|c| factor * (e.eigenvalue - c.eigenvalue).abs())
                .unwrap_or(f64::INFINITY);
            EigenResult {
                eigenvalue: e.eigenvalue,
                node_count: e.node_count,
                eigenfunction: e.eigenfunction,
                method: EigenMethod::TridiagonalBisection,
                error_estimate,
            }
        })
        .collect();
    Ok(TridiagonalSpectrum { eigenpairs, clipped, window: (lo, hi) })
}

/// Step-extrapolated matrix eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub steps: Vec<f64>,
    pub raw: Vec<f64>,
    pub eigenvalue: f64,
    pub error_estimate: f64,
}

/// Richardson extrapolation of every eigenvalue in `window` over the
/// strictly decreasing `steps`, assuming an `h^4` leading error.
pub fn richardson(op: &OperatorSpec, window: (f64, f64), steps: &[f64]) -> Result<Vec<Extrapolated>> {
    if steps.len() < 2 || steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("Richardson steps must be at least two, strictly decreasing".into()));
    }
    let (lo, hi) = (window.0, window.1.min(1.0 - GAP_DELTA));
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(steps.len());
    for &h in steps {
        let d = Discretization::new(op, h)?;
        let vals: Vec<f64> = tridiag::discrete_spectrum(&d, lo, hi)?.into_iter().map(|e| e.eigenvalue).collect();
        if let Some(first) = table.first() {
            if first.len() != vals.len() {
                return Err(Error::Numeric(format!(
                    "eigenvalue count in ({lo}, {hi}) changed from {} to {} at step {h}",
                    first.len(),
                    vals.len()
                )));
            }
        }
        table.push(vals);
    }
    let count = table[0].len();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let raw: Vec<f64> = table.iter().map(|row| row[k]).collect();
        let (eigenvalue, error_estimate) = extrapolate(steps, &raw);
        out.push(Extrapolated { steps: steps.to_vec(), raw, eigenvalue, error_estimate });
    }
    Ok(out)
}

/// Neville-style elimination of `h^p, h^{p+2}, ...`. The error estimate is
/// the change made by the last elimination.
fn extrapolate(steps: &[f64], values: &[f64]) -> (f64, f64) {
    let mut level: Vec<f64> = values.to_vec();
    let mut order = RICHARDSON_ORDER;
    let mut last_change = f64::INFINITY;
    let mut span = 1;
    while level.len() > 1 {
        let next: Vec<f64> = (0..level.len() - 1)
            .map(|i| {
                let ratio = (steps[i] / steps[i + span]).powi(order);
                (ratio * level[i + 1] - level[i]) / (ratio - 1.0)
            })
            .collect();
        last_change = (next[next.len() - 1] - level[level.len() - 1]).abs();
        level = next;
        order += 2;
        span += 1;
    }
    (level[0], last_change)
}

/// Outcome of [`eigen_shooting`].
#[derive(Debug, Clone)]
pub enum ShootingOutcome {
    Found(EigenResult),
    NoEigenvalue,
}

impl ShootingOutcome {
    pub fn found(self) -> Option<EigenResult> {
        match self {
            ShootingOutcome::Found(e) => Some(e),
            ShootingOutcome::NoEigenvalue => None,
        }
    }
}

/// Locates the eigenvalue in `bracket` by bisection on the matching
/// Wronskian to `1e-10`.
pub fn eigen_shooting(op: &OperatorSpec, bracket: (f64, f64), tol: f64) -> Result<ShootingOutcome> {
    if !(bracket.0 < bracket.1) || bracket.1 >= 1.0 {
        return Err(Error::Config(format!(
            "shooting bracket ({}, {}) must be ordered and below 1",
            bracket.0, bracket.1
        )));
    }
    let Some((eigenvalue, half_width)) = shooting::bisect(op, bracket.0, bracket.1, tol, SHOOTING_TOL)? else {
        return Ok(ShootingOutcome::NoEigenvalue);
    };
    let eigenfunction = shooting::eigenfunction(op, eigenvalue, tol)?;
    let node_count = tridiag::significant_sign_changes(eigenfunction.u());
    Ok(ShootingOutcome::Found(EigenResult {
        eigenvalue,
        node_count,
        eigenfunction,
        method: EigenMethod::ShootingMatch,
        error_estimate: half_width.max(SHOOTING_TOL),
    }))
}

/// The regular solution at spectral parameter `lambda`, sampled every
/// `SAMPLE_STEP`, with `ψ ~ r^ℓ` at the origin.
pub fn regular_solution(op: &OperatorSpec, lambda: f64, tol: f64) -> Result<Integration> {
    let grid = RadialGrid::uniform(SAMPLE_STEP, op.r_max())?;
    let start = origin_start(&op.origin_series(lambda), 1.0, ORIGIN_START)?;
    integrate_from(|r| op.weight(r, lambda), start, &grid, tol)
}

/// Interior zeros of the regular solution at `threshold` on `(0, r_max)`,
/// which equals the number of eigenvalues below `threshold`.
pub fn count_below(op: &OperatorSpec, threshold: f64, tol: f64) -> Result<usize> {
    if !(threshold < 1.0) {
        return Err(Error::Config(format!("count threshold must be below 1, got {threshold}")));
    }
    let run = regular_solution(op, threshold, tol)?;
    // An overflow only happens after the solution has settled into growth,
    // so the partial solution carries every zero.
    Ok(run.solution().map_or(0, RadialSolution::node_count))
}

/// Gap certificate for `(0, 1)` in one sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub ell: u32,
    pub below_low: usize,
    pub below_high: usize,
    /// Count difference across `λ = 0`.
    pub zero_crossings: usize,
    pub pass: bool,
}

/// `count_below(1 - δ) - count_below(δ) = 0`, and no eigenvalue at `0`.
pub fn gap_check(op: &OperatorSpec, tol: f64) -> Result<GapCheck> {
    let below_low = count_below(op, GAP_DELTA, tol)?;
    let below_high = count_below(op, 1.0 - GAP_DELTA, tol)?;
    let below_zero = count_below(op, -GAP_DELTA, tol)?;
    let zero_crossings = below_low - below_zero.min(below_low);
    Ok(GapCheck {
        ell: op.ell(),
        below_low,
        below_high,
        zero_crossings,
        pass: below_high == below_low && zero_crossings == 0,
    })
}

/// One row of the monotonicity table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaEigenvalue {
    pub beta: f64,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    pub ground: f64,
    pub rows: Vec<BetaEigenvalue>,
    /// Smallest consecutive gap, including the gap above `ground`.
    pub min_margin: Option<f64>,
    pub pass: bool,
}

/// `ground < λ_{β₁} < λ_{β₂} < ... < 0` with every gap above `margin`;
/// a row at `β = 0` must reproduce `ground` to within `margin`.
pub fn verify_monotonicity(ground: f64, rows: &[BetaEigenvalue], margin: f64) -> Result<MonotonicityCheck> {
    if rows.windows(2).any(|w| w[1].beta <= w[0].beta) || rows.iter().any(|r| !(0.0..1.0).contains(&r.beta)) {
        return Err(Error::Config("mixing-parameter grid must be strictly increasing in [0, 1)".into()));
    }
    let mut pass = true;
    let mut min_margin: Option<f64> = None;
    let mut previous = ground;
    for row in rows {
        if row.beta == 0.0 {
            pass &= (row.eigenvalue - ground).abs() <= margin;
            continue;
        }
        let gap = row.eigenvalue - previous;
        min_margin = Some(min_margin.map_or(gap, |m| m.min(gap)));
        pass &= gap > margin && row.eigenvalue < 0.0;
        previous = row.eigenvalue;
    }
    Ok(MonotonicityCheck { ground, rows: rows.to_vec(), min_margin, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlazmanCheck {
    pub ground: f64,
    pub first: Option<f64>,
    pub second: Option<f64>,
    pub pass: bool,
}

/// First eigenvalue `≥ ground - tol`, any second eigenvalue `≥ -tol`.
pub fn verify_glazman_bounds(ground: f64, eigenvalues: &[f64], tol: f64) -> GlazmanCheck {
    let first = eigenvalues.first().copied();
    let second = eigenvalues.get(1).copied();
    let pass = first.is_none_or(|l| l >= ground - tol) && second.is_none_or(|l| l >= -tol);
    GlazmanCheck { ground, first, second, pass }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighCheck {
    pub beta: f64,
    /// `⟨L_β Q, Q⟩` from `4π ∫ (Q'² + Q² - c Q⁴) r² dr`.
    pub quadrature: f64,
    /// `-2(1-β)/(1+β) ⟨Q⁴, 1⟩`.
    pub closed_form: f64,
    pub discrepancy: f64,
    pub pass: bool,
}

/// Quadratic form of the scalar operator at `Q` two ways.
pub fn rayleigh_identity(profile: &QProfile, beta: f64) -> Result<RayleighCheck> {
    let c = coupling_coefficient(beta)?;
    let four_pi = 4.0 * std::f64::consts::PI;
    let quadrature = four_pi * profile.q_quadrature(|q, dq, _| dq * dq + q * q - c * q.powi(4))?;
    let quartic = four_pi * profile.q_quadrature(|q, _, _| q.powi(4))?;
    let closed_form = -2.0 * (1.0 - beta) / (1.0 + beta) * quartic;
    let discrepancy = (quadrature - closed_form).abs();
    let pass = if closed_form == 0.0 {
        discrepancy < RAYLEIGH_ABS
    } else {
        discrepancy < RAYLEIGH_REL * closed_form.abs()
    };
    Ok(RayleighCheck { beta, quadrature, closed_form, discrepancy, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSample {
    pub lambda: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// For each `λ > 1`, the Prüfer amplitude `√(u² + (u'/k)²)`, `k = √(λ-1)`,
/// of the regular solution: sup over the last quarter of `(0, r_max)`
/// divided by sup over the middle half. An embedded eigenvalue would make
/// the ratio small.
pub fn embedded_scan(op: &OperatorSpec, lambdas: &[f64], tol: f64) -> Result<Vec<EnvelopeSample>> {
    let r_max = op.r_max();
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 1.0) {
                return Err(Error::Config(format!("embedded scan needs λ > 1, got {lambda}")));
            }
            let k = (lambda - 1.0).sqrt();
            let sol = regular_solution(op, lambda, tol)?.into_complete()?;
            let (mut middle, mut last) = (0.0f64, 0.0f64);
            for ((&r, u), du) in sol.grid().nodes().iter().zip(sol.u()).zip(sol.du()) {
                let amp = u.hypot(du / k);
                if r >= 0.75 * r_max {
                    last = last.max(amp);
                } else if r >= 0.25 * r_max {
                    middle = middle.max(amp);
                }
            }
            let ratio = last / middle;
            Ok(EnvelopeSample { lambda, ratio, pass: ratio > ENVELOPE_RATIO })
        })
        .collect()
}

/// Cosine similarity of two sampled functions.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Dual-engine agreement for one eigenvalue.
pub fn engines_agree(extrapolated: f64, shooting: f64) -> bool {
    (extrapolated - shooting).abs() < DUAL_ENGINE
}
