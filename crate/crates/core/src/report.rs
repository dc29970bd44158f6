//! Run configuration, the full verification pipeline over a grid of mixing
//! parameters, and the emitted tables.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::{fmt17, load_or_solve, QProfile};
use crate::ode::RadialGrid;
use crate::operators::{coupling_coefficient, reduce, OperatorSpec, Reduction, ReductionOutcome};
use crate::resonance::{
    nonradial_identity, resonance_verdict, sturm_record, synthetic_control, threshold_solution, Classification,
    NonradialIdentity, ResonanceResult, SturmRecord, SyntheticControl,
};
use crate::spectral::{
    correlation, count_below, eigen_shooting, eigen_tridiagonal, embedded_scan, gap_check, rayleigh_identity,
    richardson, verify_glazman_bounds, verify_monotonicity, BetaEigenvalue, EnvelopeSample, GapCheck,
    GlazmanCheck, MonotonicityCheck, RayleighCheck,
};
use crate::system::{
    chain_discrepancy, energy, nehari_membership, system_residual, transformed_residual, CandidatePair, Constraint,
    NehariSet, ResidualCheck,
};
use crate::tolerances::{
    COMPARISON_SLACK, DEFAULT_RMAX, DEFAULT_TOL, DUAL_ENGINE, EMBEDDED_LAMBDAS, ENVELOPE_RATIO, GAP_DELTA,
    MIN_RMAX, NEHARI_REL, NONRADIAL_REL, PROFILE_RESIDUAL, PROFILE_STEP, RAYLEIGH_ABS, RAYLEIGH_REL,
    RICHARDSON_STEPS, SHOOTING_TOL, SLOPE_THRESHOLD, TOL_RANGE,
};

/// File names written into the output directory.
pub const CSV_FILE: &str = "spectrum.csv";
pub const JSON_FILE: &str = "report.json";
pub const VERDICT_FILE: &str = "verdict.txt";
pub const Q_SERIES_FILE: &str = "series_q.csv";
pub const F0_SERIES_FILE: &str = "series_f0.csv";
pub const LAMBDA_SERIES_FILE: &str = "series_lambda.csv";

pub const CSV_HEADER: &str =
    "beta,lambda_beta,err,node_count,gap_certified,resonance_slope,resonance_verdict,r_star,r_0,monotone_ok";

/// Mixing parameters at which the quadratic-form identity is checked.
pub const RAYLEIGH_BETAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Zero-mode eigenvalues must be below this multiple of `h²`.
const ZERO_MODE_FACTOR: f64 = 5.0;
/// Step of the zero-mode calibration solves.
const ZERO_MODE_STEP: f64 = 1e-3;
/// Required correlation of a zero mode with its analytic form.
const ZERO_MODE_CORRELATION: f64 = 0.9999;
/// Amplitude by which a candidate is scaled off the constraint set.
const OFF_CONSTRAINT_SCALE: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beta_grid: Vec<f64>,
    pub r_max: f64,
    pub tol: f64,
    pub profile_step: f64,
    pub richardson_steps: Vec<f64>,
    pub sectors: Vec<u32>,
    pub embedded_lambdas: Vec<f64>,
    pub slope_threshold: f64,
    pub sturm_fractions: Vec<f64>,
    /// Spherical-harmonic indices `k` for the non-radial identity.
    pub nonradial_sectors: Vec<u32>,
    pub synthetic_control: bool,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beta_grid: (1..=9).map(|k| k as f64 / 10.0).collect(),
            r_max: DEFAULT_RMAX,
            tol: DEFAULT_TOL,
            profile_step: PROFILE_STEP,
            richardson_steps: RICHARDSON_STEPS.to_vec(),
            sectors: vec![0, 1, 2],
            embedded_lambdas: EMBEDDED_LAMBDAS.to_vec(),
            slope_threshold: SLOPE_THRESHOLD,
            sturm_fractions: vec![0.1, 0.3, 0.5],
            nonradial_sectors: vec![1, 4],
            synthetic_control: true,
            out_dir: PathBuf::from("linspec-out"),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()).min(8),
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| Error::Config(format!("{key}: {s:?}: {e}"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| Error::Config(format!("{key}: {value:?}: {e}")))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "beta_grid" | "beta-grid" => self.beta_grid = parse_list(key, value)?,
            "beta" => self.beta_grid = vec![parse_one(key, value)?],
            "rmax" | "r_max" => self.r_max = parse_one(key, value)?,
            "tol" => self.tol = parse_one(key, value)?,
            "profile_step" => self.profile_step = parse_one(key, value)?,
            "richardson_steps" => self.richardson_steps = parse_list(key, value)?,
            "sectors" => self.sectors = parse_list(key, value)?,
            "embedded_lambdas" => self.embedded_lambdas = parse_list(key, value)?,
            "slope_threshold" => self.slope_threshold = parse_one(key, value)?,
            "sturm_fractions" => self.sturm_fractions = parse_list(key, value)?,
            "nonradial_sectors" => self.nonradial_sectors = parse_list(key, value)?,
            "synthetic_control" => self.synthetic_control = parse_one(key, value)?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "workers" => self.workers = parse_one(key, value)?,
            other => return Err(Error::Config(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.beta_grid.is_empty() {
            return bad("empty mixing-parameter grid".into());
        }
        if self.beta_grid.iter().any(|b| !(0.0..1.0).contains(b)) {
            return bad(format!("mixing parameters must lie in [0, 1): {:?}", self.beta_grid));
        }
        if self.beta_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("mixing-parameter grid must be strictly increasing".into());
        }
        if !(self.r_max >= MIN_RMAX) || !self.r_max.is_finite() {
            return bad(format!("r_max must be >= {MIN_RMAX}, got {}", self.r_max));
        }
        if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&self.tol) {
            return bad(format!("tol {:e} outside [{:e}, {:e}]", self.tol, TOL_RANGE.0, TOL_RANGE.1));
        }
        if !(self.profile_step > 0.0 && self.profile_step <= 0.1) {
            return bad(format!("profile_step must lie in (0, 0.1], got {}", self.profile_step));
        }
        if self.richardson_steps.len() < 2
            || self.richardson_steps.windows(2).any(|w| w[1] >= w[0])
            || self.richardson_steps.iter().any(|h| !(*h > 0.0 && *h <= 1e-2))
        {
            return bad("richardson_steps must be >= 2 strictly decreasing values in (0, 1e-2]".into());
        }
        if self.sectors.is_empty() {
            return bad("no angular sectors to scan".into());
        }
        if self.embedded_lambdas.iter().any(|l| !(*l > 1.0)) {
            return bad("embedded_lambdas must exceed 1".into());
        }
        if !(self.slope_threshold > 0.0) {
            return bad("slope_threshold must be positive".into());
        }
        if self.sturm_fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0))
            || self.sturm_fractions.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("sturm_fractions must be strictly increasing in (0, 1)".into());
        }
        if self.nonradial_sectors.contains(&0) {
            return bad("nonradial_sectors must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        Ok(())
    }

    /// Q cache file for this configuration's key.
    pub fn cache_path(&self) -> PathBuf {
        self.out_dir.join("cache").join(format!(
            "q_rmax{}_tol{:e}_step{}.txt",
            self.r_max, self.tol, self.profile_step
        ))
    }

    fn settings(&self) -> Settings {
        Settings {
            beta_grid: self.beta_grid.clone(),
            r_max: self.r_max,
            tol: self.tol,
            profile_step: self.profile_step,
            richardson_steps: self.richardson_steps.clone(),
            sectors: self.sectors.clone(),
            embedded_lambdas: self.embedded_lambdas.clone(),
            slope_threshold: self.slope_threshold,
            sturm_fractions: self.sturm_fractions.clone(),
            nonradial_sectors: self.nonradial_sectors.clone(),
            synthetic_control: self.synthetic_control,
            tolerances: Tolerances::current(),
        }
    }
}

/// Thresholds applied by the pipeline, echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub profile_residual: f64,
    pub dual_engine: f64,
    pub shooting: f64,
    pub gap_delta: f64,
    pub monotone_margin: f64,
    pub comparison_slack: f64,
    pub rayleigh_relative: f64,
    pub rayleigh_absolute: f64,
    pub nonradial_relative: f64,
    pub nehari_relative: f64,
    pub envelope_ratio: f64,
    pub zero_mode_factor: f64,
    pub zero_mode_correlation: f64,
}

impl Tolerances {
    fn current() -> Self {
        Self {
            profile_residual: PROFILE_RESIDUAL,
            dual_engine: DUAL_ENGINE,
            shooting: SHOOTING_TOL,
            gap_delta: GAP_DELTA,
            monotone_margin: DUAL_ENGINE,
            comparison_slack: COMPARISON_SLACK,
            rayleigh_relative: RAYLEIGH_REL,
            rayleigh_absolute: RAYLEIGH_ABS,
            nonradial_relative: NONRADIAL_REL,
            nehari_relative: NEHARI_REL,
            envelope_ratio: ENVELOPE_RATIO,
            zero_mode_factor: ZERO_MODE_FACTOR,
            zero_mode_correlation: ZERO_MODE_CORRELATION,
        }
    }
}

/// Numerical settings of a run (everything but output location and worker
/// count, which do not affect results).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub beta_grid: Vec<f64>,
    pub r_max: f64,
    pub tol: f64,
    pub profile_step: f64,
    pub richardson_steps: Vec<f64>,
    pub sectors: Vec<u32>,
    pub embedded_lambdas: Vec<f64>,
    pub slope_threshold: f64,
    pub sturm_fractions: Vec<f64>,
    pub nonradial_sectors: Vec<u32>,
    pub synthetic_control: bool,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub center_value: f64,
    pub decay_rate: f64,
    pub tail_amplitude: f64,
    pub residual_sup: f64,
    pub node_count: usize,
    pub positive: bool,
    pub decreasing: bool,
    pub pass: bool,
}

impl GroundStateSummary {
    pub fn of(profile: &QProfile) -> Self {
        let positive = profile.q().iter().all(|q| *q > 0.0);
        let decreasing = profile.dq().iter().all(|d| *d < 0.0);
        let residual_sup = profile.residual_sup();
        let decay_rate = profile.decay_rate();
        let node_count = profile.node_count();
        Self {
            center_value: profile.center_value(),
            decay_rate,
            tail_amplitude: profile.tail_amplitude(),
            residual_sup,
            node_count,
            positive,
            decreasing,
            pass: positive
                && decreasing
                && node_count == 0
                && residual_sup < PROFILE_RESIDUAL
                && (decay_rate - 1.0).abs() <= crate::tolerances::DECAY_RATE_TOL,
        }
    }
}

/// Bottom eigenvalue of a radial operator by both engines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualEigen {
    pub extrapolated: f64,
    pub raw: Vec<f64>,
    pub richardson_error: f64,
    pub shooting: Option<f64>,
    pub difference: Option<f64>,
    pub node_count: usize,
    pub single_signed: bool,
    pub agree: bool,
}

impl DualEigen {
    /// Combined error: extrapolation error or engine disagreement, whichever
    /// is larger.
    pub fn error(&self) -> f64 {
        self.richardson_error.max(self.difference.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroMode {
    pub coupling: f64,
    pub ell: u32,
    pub eigenvalue: f64,
    pub bound: f64,
    pub correlation: f64,
    pub pass: bool,
}

/// Checks on the two scalar operators at the ends of the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceChecks {
    pub ground: DualEigen,
    /// Eigenvalues of the coupling-3 operator below `1 - δ` per sector.
    pub counts_below_one: Vec<(u32, usize)>,
    /// `count(1 - δ) - count(δ)` per sector, all zero if `(0, 1)` is free.
    pub gap_counts: Vec<(u32, usize)>,
    pub zero_modes: Vec<ZeroMode>,
    pub resonances: Vec<ResonanceResult>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemChecks {
    pub symmetric_residual: ResidualCheck,
    pub standard_residual: ResidualCheck,
    pub transformed_residual: ResidualCheck,
    pub componentwise: Vec<Constraint>,
    pub summed_standard: Vec<Constraint>,
    /// The symmetric solution scaled off the constraint set; expected to fail.
    pub scaled_componentwise: Vec<Constraint>,
    pub energy: f64,
    pub energy_closed_form: f64,
    pub energy_ok: bool,
    pub chain_discrepancy: f64,
    pub chain_ok: bool,
    pub pass: bool,
}

/// Spectrum of the diagonal operator as the union of its components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSpectrum {
    pub discrete: Vec<f64>,
    pub essential_from: f64,
    /// `1` is neither an eigenvalue nor a resonance of either component.
    pub threshold_regular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRecord {
    pub beta: f64,
    pub coupling: f64,
    pub eigen: DualEigen,
    pub eigenvalues_below_one: Vec<f64>,
    pub gap: Vec<GapCheck>,
    pub gap_certified: bool,
    pub glazman: GlazmanCheck,
    pub resonance: ResonanceResult,
    pub sturm: SturmRecord,
    pub embedded: Vec<EnvelopeSample>,
    pub nonradial: Vec<NonradialIdentity>,
    pub system: SystemChecks,
    pub diagonal_spectrum: DiagonalSpectrum,
    pub monotone_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub beta: f64,
    pub reduction: Option<Reduction>,
    pub matches_diagonal: bool,
    pub quoted_matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub settings: Settings,
    pub conventions: Vec<String>,
    pub ground_state: GroundStateSummary,
    pub reference: ReferenceChecks,
    pub records: Vec<BetaRecord>,
    pub monotonicity: MonotonicityCheck,
    pub rayleigh: Vec<RayleighCheck>,
    pub reductions: Vec<ReductionCheck>,
    pub synthetic_control: Option<SyntheticControl>,
    pub pass: bool,
}

fn conventions() -> Vec<String> {
    [
        "integrals over R^3 are 4*pi times radial integrals with weight r^2",
        "radial solutions are stored as u = r*psi",
        "threshold solutions are normalized by F(0) = 0, F'(0) = -1; verdicts use |slope|",
        "r_0 is the first zero of the threshold solution at epsilon = 0",
        "the non-radial identity passes in the pipeline when it closes and the solution never vanishes before r_max",
        "the quoted closed-form coupling of the generalized reduction is reported, not trusted",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Lower edge of every spectral window, one unit below the bottom of the
/// potential.
fn spectral_floor(profile: &QProfile, coupling: f64) -> f64 {
    1.0 - coupling * profile.center_value().powi(2) - 1.0
}

/// Bottom eigenvalue of `op` by Richardson-extrapolated bisection and by
/// shooting, over the window from the bottom of the potential to `1`.
pub fn dual_eigen(op: &OperatorSpec, cfg: &RunConfig) -> Result<DualEigen> {
    let lo = spectral_floor(op.profile(), op.coupling());
    let window = (lo, 1.0 - GAP_DELTA);
    let ex = richardson(op, window, &cfg.richardson_steps)?;
    let first = ex
        .first()
        .ok_or_else(|| Error::Numeric(format!("no eigenvalue below 1 at coupling {}", op.coupling())))?;
    let finest = *cfg.richardson_steps.last().unwrap();
    let tri = eigen_tridiagonal(op, window, finest)?;
    let tri_nodes = tri.eigenpairs.first().map_or(usize::MAX, |e| e.node_count);
    let shot = eigen_shooting(op, (lo, 1.0 - 1e-3), cfg.tol)?.found();
    let shooting = shot.as_ref().map(|e| e.eigenvalue);
    let difference = shooting.map(|s| (s - first.eigenvalue).abs());
    let shot_nodes = shot.as_ref().map_or(usize::MAX, |e| e.node_count);
    let single_signed = shot.as_ref().is_some_and(|e| {
        let u = e.eigenfunction.u();
        let floor = 1e-10 * u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        u.iter().all(|v| *v >= -floor)
    });
    Ok(DualEigen {
        extrapolated: first.eigenvalue,
        raw: first.raw.clone(),
        richardson_error: first.error_estimate,
        shooting,
        difference,
        node_count: tri_nodes.max(shot_nodes).min(tri_nodes),
        single_signed: single_signed && tri_nodes == 0 && shot_nodes == 0,
        agree: difference.is_some_and(|d| d < DUAL_ENGINE),
    })
}

fn zero_mode(profile: &Arc<QProfile>, coupling: f64, ell: u32) -> Result<ZeroMode> {
    let op = OperatorSpec::new(coupling, ell, Arc::clone(profile))?;
    let tri = eigen_tridiagonal(&op, (-0.5, 0.9), ZERO_MODE_STEP)?;
    let bound = ZERO_MODE_FACTOR * ZERO_MODE_STEP * ZERO_MODE_STEP;
    let Some(e) = tri.eigenpairs.first() else {
        return Ok(ZeroMode { coupling, ell, eigenvalue: f64::MAX, bound, correlation: 0.0, pass: false });
    };
    let sol = &e.eigenfunction;
    let analytic: Vec<f64> = sol
        .grid()
        .nodes()
        .iter()
        .map(|&r| {
            let p = profile.q_at(r);
            if ell == 0 {
                r * p.q
            } else {
                r * p.dq
            }
        })
        .collect();
    let corr = correlation(sol.u(), &analytic).abs();
    Ok(ZeroMode {
        coupling,
        ell,
        eigenvalue: e.eigenvalue,
        bound,
        correlation: corr,
        pass: tri.eigenpairs.len() == 1 && e.eigenvalue.abs() < bound && corr >= ZERO_MODE_CORRELATION,
    })
}

fn reference_checks(profile: &Arc<QProfile>, cfg: &RunConfig) -> Result<ReferenceChecks> {
    let l0 = OperatorSpec::new(3.0, 0, Arc::clone(profile))?;
    let ground = dual_eigen(&l0, cfg)?;
    let mut counts_below_one = Vec::new();
    let mut gap_counts = Vec::new();
    for &ell in &cfg.sectors {
        let op = l0.with_ell(ell);
        let high = count_below(&op, 1.0 - GAP_DELTA, cfg.tol)?;
        let low = count_below(&op, GAP_DELTA, cfg.tol)?;
        counts_below_one.push((ell, high));
        gap_counts.push((ell, high - low.min(high)));
    }
    let zero_modes = vec![zero_mode(profile, 1.0, 0)?, zero_mode(profile, 3.0, 1)?];
    let resonances = vec![
        resonance_verdict(profile, 3.0, cfg.tol, cfg.slope_threshold)?,
        resonance_verdict(profile, 1.0, cfg.tol, cfg.slope_threshold)?,
    ];
    let radial_count_ok = counts_below_one.iter().all(|&(ell, n)| ell != 0 || n == 1);
    let pass = ground.agree
        && ground.single_signed
        && ground.extrapolated < 0.0
        && radial_count_ok
        && gap_counts.iter().all(|&(_, n)| n == 0)
        && zero_modes.iter().all(|z| z.pass)
        && resonances.iter().all(|r| r.classification == Classification::NoResonance);
    Ok(ReferenceChecks { ground, counts_below_one, gap_counts, zero_modes, resonances, pass })
}

fn system_checks(profile: &Arc<QProfile>, beta: f64) -> Result<SystemChecks> {
    let symmetric = CandidatePair::symmetric(beta, Arc::clone(profile))?;
    let standard = CandidatePair::standard(beta, Arc::clone(profile))?;
    let symmetric_residual = system_residual(&symmetric)?;
    let standard_residual = system_residual(&standard)?;
    let transformed = transformed_residual(Arc::clone(profile), beta)?;
    let componentwise = nehari_membership(&symmetric, NehariSet::Componentwise)?;
    let summed_standard = nehari_membership(&standard, NehariSet::Summed)?;
    let scaled_componentwise = nehari_membership(&symmetric.scaled(OFF_CONSTRAINT_SCALE)?, NehariSet::Componentwise)?;
    let e = energy(&symmetric)?;
    let quartic = 4.0 * std::f64::consts::PI * profile.q_quadrature(|q, _, _| q.powi(4))?;
    let energy_closed_form = 0.5 * quartic / (1.0 + beta);
    let energy_ok = (e - energy_closed_form).abs() < 1e-7 * energy_closed_form.abs();
    let chain = chain_discrepancy(&symmetric)?;
    let chain_ok = chain < 1e-12;
    let pass = symmetric_residual.pass
        && standard_residual.pass
        && transformed.pass
        && componentwise.iter().all(|c| c.holds)
        && summed_standard.iter().all(|c| c.holds)
        && scaled_componentwise.iter().all(|c| !c.holds)
        && energy_ok
        && chain_ok;
    Ok(SystemChecks {
        symmetric_residual,
        standard_residual,
        transformed_residual: transformed,
        componentwise,
        summed_standard,
        scaled_componentwise,
        energy: e,
        energy_closed_form,
        energy_ok,
        chain_discrepancy: chain,
        chain_ok,
        pass,
    })
}

fn beta_record(profile: &Arc<QProfile>, beta: f64, reference: &ReferenceChecks, cfg: &RunConfig) -> Result<BetaRecord> {
    let coupling = coupling_coefficient(beta)?;
    let op = OperatorSpec::new(coupling, 0, Arc::clone(profile))?;
    let eigen = dual_eigen(&op, cfg)?;
    let finest = *cfg.richardson_steps.last().unwrap();
    let floor = spectral_floor(profile, coupling);
    let eigenvalues_below_one: Vec<f64> = eigen_tridiagonal(&op, (floor, 1.0), finest)?
        .eigenpairs
        .iter()
        .map(|e| e.eigenvalue)
        .collect();

    let gap = cfg
        .sectors
        .iter()
        .map(|&ell| gap_check(&op.with_ell(ell), cfg.tol))
        .collect::<Result<Vec<_>>>()?;
    // At β = 0 the ℓ = 1 sector carries the translation zero modes.
    let gap_certified = gap
        .iter()
        .all(|g| g.below_high == g.below_low && (beta == 0.0 || g.zero_crossings == 0));

    let glazman = verify_glazman_bounds(reference.ground.extrapolated, &eigenvalues_below_one, DUAL_ENGINE);
    let resonance = resonance_verdict(profile, coupling, cfg.tol, cfg.slope_threshold)?;
    let sturm = sturm_record(profile, beta, eigen.extrapolated, &cfg.sturm_fractions, cfg.tol)?;
    let embedded = embedded_scan(&op, &cfg.embedded_lambdas, cfg.tol)?;
    let nonradial = if beta > 0.0 {
        cfg.nonradial_sectors
            .iter()
            .map(|&k| nonradial_identity(profile, beta, k, cfg.tol))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let system = system_checks(profile, beta)?;

    let mut discrete: Vec<f64> = vec![reference.ground.extrapolated, eigen.extrapolated];
    discrete.sort_by(f64::total_cmp);
    discrete.dedup();
    let no_resonance = resonance.classification == Classification::NoResonance;
    let diagonal_spectrum = DiagonalSpectrum {
        discrete,
        essential_from: 1.0,
        threshold_regular: no_resonance
            && gap_certified
            && reference.resonances.first().is_some_and(|r| r.classification == Classification::NoResonance)
            && reference.gap_counts.iter().all(|&(_, n)| n == 0),
    };

    let pass = eigen.agree
        && eigen.single_signed
        && eigen.extrapolated < 0.0
        && eigenvalues_below_one.len() == 1
        && gap_certified
        && glazman.pass
        && no_resonance
        && sturm.pass
        && embedded.iter().all(|e| e.pass)
        && nonradial.iter().all(|n| n.consistent)
        && system.pass;
    Ok(BetaRecord {
        beta,
        coupling,
        eigen,
        eigenvalues_below_one,
        gap,
        gap_certified,
        glazman,
        resonance,
        sturm,
        embedded,
        nonradial,
        system,
        diagonal_spectrum,
        monotone_ok: false,
        pass,
    })
}

/// Runs `job` over `items` on `workers` threads; results come back in input
/// order regardless of completion order.
fn parallel_map<T, R, F>(items: &[T], workers: usize, job: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = job(&items[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Loads or solves `Q` for `cfg` through the cache.
pub fn profile_for(cfg: &RunConfig) -> Result<QProfile> {
    let grid = RadialGrid::uniform(cfg.profile_step, cfg.r_max)?;
    load_or_solve(&cfg.cache_path(), cfg.tol, &grid)
}

/// Computes the full report without writing anything.
pub fn compute_report(profile: Arc<QProfile>, cfg: &RunConfig) -> Result<SpectrumReport> {
    cfg.validate()?;
    let ground_state = GroundStateSummary::of(&profile);
    let reference = reference_checks(&profile, cfg)?;

    let results = parallel_map(&cfg.beta_grid, cfg.workers, |&beta| beta_record(&profile, beta, &reference, cfg));
    let mut records = results.into_iter().collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.beta.total_cmp(&b.beta));

    let rows: Vec<BetaEigenvalue> = records
        .iter()
        .map(|r| BetaEigenvalue { beta: r.beta, eigenvalue: r.eigen.extrapolated })
        .collect();
    let monotonicity = verify_monotonicity(reference.ground.extrapolated, &rows, DUAL_ENGINE)?;
    let mut previous = reference.ground.extrapolated;
    for r in records.iter_mut() {
        let lambda = r.eigen.extrapolated;
        r.monotone_ok = if r.beta == 0.0 {
            (lambda - previous).abs() <= DUAL_ENGINE
        } else {
            lambda - previous > DUAL_ENGINE && lambda < 0.0
        };
        previous = lambda;
        r.pass &= r.monotone_ok;
    }

    let rayleigh = RAYLEIGH_BETAS
        .iter()
        .map(|&b| rayleigh_identity(&profile, b))
        .collect::<Result<Vec<_>>>()?;
    let reductions = cfg
        .beta_grid
        .iter()
        .map(|&beta| {
            let outcome = reduce(1.0, 1.0, beta)?;
            let c = coupling_coefficient(beta)?;
            Ok(match outcome {
                ReductionOutcome::Positive(r) => ReductionCheck {
                    beta,
                    matches_diagonal: (r.couplings[0] - 3.0).abs() < 1e-12 && (r.couplings[1] - c).abs() < 1e-12,
                    quoted_matches: (r.quoted_coupling - c).abs() < 1e-12,
                    reduction: Some(r),
                },
                ReductionOutcome::NoPositiveReduction { .. } => {
                    ReductionCheck { beta, reduction: None, matches_diagonal: false, quoted_matches: false }
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let synthetic = if cfg.synthetic_control {
        Some(synthetic_control(&profile, cfg.tol, cfg.slope_threshold)?)
    } else {
        None
    };

    let pass = ground_state.pass
        && reference.pass
        && records.iter().all(|r| r.pass)
        && monotonicity.pass
        && rayleigh.iter().all(|r| r.pass)
        && reductions.iter().all(|r| r.matches_diagonal)
        && synthetic.as_ref().is_none_or(|s| s.pass);
    Ok(SpectrumReport {
        settings: cfg.settings(),
        conventions: conventions(),
        ground_state,
        reference,
        records,
        monotonicity,
        rayleigh,
        reductions,
        synthetic_control: synthetic,
        pass,
    })
}

/// Solves or loads `Q`, computes the report, and writes every artifact into
/// `cfg.out_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<SpectrumReport> {
    cfg.validate()?;
    let profile = Arc::new(profile_for(cfg)?);
    let report = compute_report(Arc::clone(&profile), cfg)?;
    emit_tables(&report, &cfg.out_dir)?;
    emit_series(&profile, &report, &cfg.out_dir, cfg.tol)?;
    std::fs::write(cfg.out_dir.join(VERDICT_FILE), render_verdict(&report))?;
    Ok(report)
}

fn opt17(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt17)
}

pub fn to_csv(report: &SpectrumReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let mut records: Vec<&BetaRecord> = report.records.iter().collect();
    records.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    for r in records {
        let verdict = match r.resonance.classification {
            Classification::NoResonance => "no-resonance",
            Classification::ResonanceSuspected => "resonance-suspected",
            Classification::Inconclusive => "inconclusive",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt17(r.beta),
            fmt17(r.eigen.extrapolated),
            fmt17(r.eigen.error()),
            r.eigen.node_count,
            r.gap_certified,
            fmt17(r.resonance.tail_slope),
            verdict,
            opt17(r.sturm.r_star),
            opt17(r.sturm.r_zero),
            r.monotone_ok,
        );
    }
    out
}

pub fn to_json(report: &SpectrumReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<SpectrumReport> {
    Ok(serde_json::from_str(text)?)
}

/// Writes the CSV table and JSON report.
pub fn emit_tables(report: &SpectrumReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(CSV_FILE), to_csv(report))?;
    std::fs::write(dir.join(JSON_FILE), to_json(report)?)?;
    Ok(())
}

/// Plot series: `r,Q`, `r,F₀(β…)` and `beta,lambda_beta`.
pub fn emit_series(profile: &QProfile, report: &SpectrumReport, dir: &Path, tol: f64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut q = String::from("r,Q\n");
    for (r, v) in profile.grid().nodes().iter().zip(profile.q()) {
        let _ = writeln!(q, "{},{}", fmt17(*r), fmt17(*v));
    }
    std::fs::write(dir.join(Q_SERIES_FILE), q)?;

    let betas: BTreeSet<u64> = report.records.iter().map(|r| r.beta.to_bits()).collect();
    let betas: Vec<f64> = betas.into_iter().map(f64::from_bits).collect();
    let solutions = betas
        .iter()
        .map(|&b| threshold_solution(profile, coupling_coefficient(b)?, 0.0, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut f0 = String::from("r");
    for b in &betas {
        let _ = write!(f0, ",F0_beta_{b}");
    }
    f0.push('\n');
    if let Some(first) = solutions.first() {
        for (i, r) in first.grid().nodes().iter().enumerate().step_by(10) {
            f0.push_str(&fmt17(*r));
            for s in &solutions {
                let _ = write!(f0, ",{}", fmt17(s.u()[i]));
            }
            f0.push('\n');
        }
    }
    std::fs::write(dir.join(F0_SERIES_FILE), f0)?;

    let mut lam = String::from("beta,lambda_beta\n");
    for r in &report.records {
        let _ = writeln!(lam, "{},{}", fmt17(r.beta), fmt17(r.eigen.extrapolated));
    }
    std::fs::write(dir.join(LAMBDA_SERIES_FILE), lam)?;
    Ok(())
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Human-readable verdict.
pub fn render_verdict(report: &SpectrumReport) -> String {
    let mut out = String::new();
    let g = &report.ground_state;
    let _ = writeln!(out, "overall: {}", mark(report.pass));
    let _ = writeln!(
        out,
        "[{}] ground state: Q(0) = {:.12}, decay rate = {:.6}, residual = {:.2e}",
        mark(g.pass),
        g.center_value,
        g.decay_rate,
        g.residual_sup
    );
    let rf = &report.reference;
    let _ = writeln!(
        out,
        "[{}] reference operators: lambda_0 = {:.10} (shooting {:?}), zero modes {:?}",
        mark(rf.pass),
        rf.ground.extrapolated,
        rf.ground.shooting,
        rf.zero_modes.iter().map(|z| z.eigenvalue).collect::<Vec<_>>()
    );
    for r in &report.records {
        let _ = writeln!(
            out,
            "[{}] beta = {}: lambda = {:.10}, gap {}, threshold {:?} (slope {:.4}), sturm {}, monotone {}",
            mark(r.pass),
            r.beta,
            r.eigen.extrapolated,
            mark(r.gap_certified),
            r.resonance.classification,
            r.resonance.tail_slope,
            mark(r.sturm.pass),
            mark(r.monotone_ok)
        );
    }
    let _ = writeln!(out, "[{}] monotonicity in beta", mark(report.monotonicity.pass));
    let _ = writeln!(
        out,
        "[{}] quadratic-form identity at beta = {:?}",
        mark(report.rayleigh.iter().all(|r| r.pass)),
        RAYLEIGH_BETAS
    );
    for red in &report.reductions {
        if let Some(r) = &red.reduction {
            let _ = writeln!(
                out,
                "[{}] reduction at beta = {}: couplings {:.12?}; quoted closed form {:.12} differs by {:.3e}",
                mark(red.matches_diagonal),
                red.beta,
                r.couplings,
                r.quoted_coupling,
                r.quoted_discrepancy
            );
        }
    }
    if let Some(s) = &report.synthetic_control {
        let _ = writeln!(
            out,
            "[{}] synthetic control: coupling {:.12} gives {:?}",
            mark(s.pass),
            s.coupling,
            s.verdict.classification
        );
    }
    for c in &report.conventions {
        let _ = writeln!(out, "note: {c}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing_and_defaults() {
        let c = RunConfig::from_text("# comment\nbeta_grid = 0.2, 0.4\nrmax=25\n\ntol = 1e-10\n").unwrap();
        assert_eq!(c.beta_grid, vec![0.2, 0.4]);
        assert_eq!(c.r_max, 25.0);
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.sectors, vec![0, 1, 2]);
        let d = RunConfig::default();
        assert_eq!(d.beta_grid.len(), 9);
        assert!((d.beta_grid[8] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn config_rejections() {
        for text in [
            "beta_grid = 0.5, 0.2",
            "beta = 1.0",
            "beta = -0.1",
            "rmax = 10",
            "tol = 1e-3",
            "richardson_steps = 1e-3, 2e-3",
            "workers = 0",
            "colour = blue",
            "just words",
        ] {
            assert!(matches!(RunConfig::from_text(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn workers_preserve_order() {
        let items: Vec<u64> = (0..50).collect();
        let out = parallel_map(&items, 7, |&i| {
            std::thread::sleep(std::time::Duration::from_micros((50 - i) * 20));
            i * i
        });
        assert_eq!(out, items.iter().map(|i| i * i).collect::<Vec<_>>());
    }
}
