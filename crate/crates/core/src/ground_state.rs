//! The positive radial ground state `Q` of `-ΔQ + Q - Q³ = 0` in 3-D.
//!
//! `Q` is found by shooting on the center value `b = Q(0)`: a shot with `b`
//! too large crosses zero, a shot with `b` too small turns back up. The
//! bisection limit of the two regimes is the ground state. Since any shot
//! eventually leaves the separatrix, the far field is completed by an
//! inward integration from `r_max` seeded with the exact decaying solution
//! `A e^{-r}/r` of the linearized equation and matched in value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hermite::{gauss_legendre_composite, Hermite5};
use crate::ode::{Dopri5, RadialGrid, RunEnd, State};
use crate::tolerances::{
    CENTER_BRACKET, MAX_BISECTION, MIN_RMAX, ORIGIN_START, TAIL_SHARE,
};

const CACHE_VERSION: &str = "linspec ground-state profile v1";
/// Relative separation of the two bracketing shots that ends the trusted
/// outward range.
const SHOT_SEPARATION: f64 = 1e-8;
/// Number of even series coefficients kept for the origin expansion.
const SERIES_TERMS: usize = 5;

/// `Q` and `Q'` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    pub q: f64,
    pub dq: f64,
    /// Set when `r > r_max` and the fitted tail was used.
    pub extrapolated: bool,
}

/// Sampled ground state with interpolation and decay metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct QProfile {
    grid: RadialGrid,
    tol: f64,
    center: f64,
    series: [f64; SERIES_TERMS],
    tail_amplitude: f64,
    decay_rate: f64,
    residual_sup: f64,
    // Index 0 is r = 0.
    interp: Hermite5,
}

/// `Q''` from the equation itself.
#[inline]
fn second_derivative(r: f64, q: f64, dq: f64) -> f64 {
    q - q * q * q - 2.0 * dq / r
}

/// Even Taylor coefficients `a_0, a_2, ...` of the regular solution with
/// `Q(0) = b`.
pub fn center_series(b: f64) -> [f64; SERIES_TERMS] {
    let mut a = [0.0; SERIES_TERMS];
    a[0] = b;
    for n in 1..SERIES_TERMS {
        // (2n)(2n+1) a_{2n} = [Q - Q^3]_{2n-2}
        let m = n - 1;
        let mut cube = 0.0;
        for i in 0..=m {
            for j in 0..=(m - i) {
                cube += a[i] * a[j] * a[m - i - j];
            }
        }
        let nf = n as f64;
        a[n] = (a[m] - cube) / (2.0 * nf * (2.0 * nf + 1.0));
    }
    a
}

fn series_eval(a: &[f64; SERIES_TERMS], r: f64) -> (f64, f64) {
    let r2 = r * r;
    let (mut q, mut dq, mut pow) = (0.0, 0.0, 1.0);
    for (n, an) in a.iter().enumerate() {
        q += an * pow;
        if n > 0 {
            dq += 2.0 * n as f64 * an * pow / r;
        }
        pow *= r2;
    }
    (q, dq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ShotClass {
    Crossed,
    NotCrossed,
}

struct Shot {
    class: ShotClass,
    u: Vec<f64>,
    du: Vec<f64>,
}

// u = r Q satisfies u'' = u - u^3 / r^2.
fn nonlinear_rhs(r: f64, y: &State) -> State {
    [y[1], y[0] - y[0] * y[0] * y[0] / (r * r)]
}

fn shoot(b: f64, nodes: &[f64], tol: f64, record: bool) -> Result<Shot> {
    let a = center_series(b);
    let (q0, dq0) = series_eval(&a, ORIGIN_START);
    let y0 = [ORIGIN_START * q0, q0 + ORIGIN_START * dq0];
    let mut class = ShotClass::NotCrossed;
    let (mut u, mut du) = (Vec::new(), Vec::new());
    let end = Dopri5::new(tol).run(nonlinear_rhs, ORIGIN_START, y0, nodes, |r, y| {
        if y[0] < 0.0 {
            class = ShotClass::Crossed;
            return false;
        }
        if record {
            u.push(y[0]);
            du.push(y[1]);
        }
        // Q' = (u' - u/r) / r turning positive: the shot fails to decay.
        !(y[1] * r - y[0] > 0.0)
    })?;
    if let RunEnd::BlowUp(_) = end {
        class = ShotClass::NotCrossed;
    }
    Ok(Shot { class, u, du })
}

/// Solves for the ground state on `grid` with integrator tolerance `tol`.
///
/// The bisection on `Q(0)` runs until the bracket collapses to adjacent
/// floating-point numbers (at most 200 steps).
pub fn solve_ground_state(tol: f64, grid: &RadialGrid) -> Result<QProfile> {
    if !(tol >= 1e-12) {
        return Err(Error::Config(format!("ground-state tolerance {tol:e} below 1e-12")));
    }
    if grid.r_max() < MIN_RMAX {
        return Err(Error::Config(format!(
            "r_max {} below the minimum {MIN_RMAX}",
            grid.r_max()
        )));
    }
    if grid.nodes()[0] <= ORIGIN_START {
        return Err(Error::Config("first profile node must exceed the series start".into()));
    }
    let nodes = grid.nodes();
    let (mut lo, mut hi) = CENTER_BRACKET;
    if shoot(hi, nodes, tol, false)?.class != ShotClass::Crossed
        || shoot(lo, nodes, tol, false)?.class != ShotClass::NotCrossed
    {
        return Err(Error::BracketNotFound { lo, hi });
    }
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, nodes, tol, false)?.class {
            ShotClass::Crossed => hi = mid,
            ShotClass::NotCrossed => lo = mid,
        }
    }
    let below = shoot(lo, nodes, tol, true)?;
    let above = shoot(hi, nodes, tol, true)?;

    // Last node up to which both shots agree.
    let reach = below.u.len().min(above.u.len());
    let mut split = reach;
    for i in 0..reach {
        if (below.u[i] - above.u[i]).abs() > SHOT_SEPARATION * below.u[i].abs() {
            split = i;
            break;
        }
    }
    // Back off one unit of radius (the separation grows like e^{2r}) and
    // stay in the inner half of the domain.
    let r_split = (nodes[split.saturating_sub(1)] - 1.0).min(0.5 * grid.r_max());
    let m = nodes.partition_point(|&r| r <= r_split).max(2) - 1;
    let (u_match, _) = (below.u[m], below.du[m]);

    // Inward far field: u = A e^{-r} at r_max, matched in value at node m.
    let r_max = grid.r_max();
    let inward = |amp: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let targets: Vec<f64> = nodes[m..].iter().rev().copied().collect();
        let y0 = [amp * (-r_max).exp(), -amp * (-r_max).exp()];
        let (mut u, mut du) = (Vec::new(), Vec::new());
        let end = Dopri5::new(tol).run(nonlinear_rhs, r_max, y0, &targets, |_, y| {
            u.push(y[0]);
            du.push(y[1]);
            true
        })?;
        if end != RunEnd::Finished {
            return Err(Error::Numeric("inward tail integration failed".into()));
        }
        u.reverse();
        du.reverse();
        Ok((u, du))
    };
    let mut amp = u_match * nodes[m].exp();
    let mut tail = inward(amp)?;
    for _ in 0..3 {
        amp *= u_match / tail.0[0];
        tail = inward(amp)?;
    }

    let n = nodes.len();
    let mut q = Vec::with_capacity(n);
    let mut dq = Vec::with_capacity(n);
    for (i, &r) in nodes.iter().enumerate() {
        let (u, du) = if i <= m {
            (below.u[i], below.du[i])
        } else {
            (tail.0[i - m], tail.1[i - m])
        };
        let qv = u / r;
        q.push(qv);
        dq.push((du - qv) / r);
    }
    QProfile::assemble(grid.clone(), tol, lo, q, dq)
}

impl QProfile {
    fn assemble(grid: RadialGrid, tol: f64, center: f64, q: Vec<f64>, dq: Vec<f64>) -> Result<Self> {
        if q.len() != grid.len() || dq.len() != grid.len() {
            return Err(Error::GridMismatch { expected: grid.len(), got: q.len().min(dq.len()) });
        }
        let series = center_series(center);
        let mut xs = Vec::with_capacity(grid.len() + 1);
        xs.push(0.0);
        xs.extend_from_slice(grid.nodes());
        let mut f = Vec::with_capacity(xs.len());
        let mut d1 = Vec::with_capacity(xs.len());
        let mut d2 = Vec::with_capacity(xs.len());
        f.push(center);
        d1.push(0.0);
        d2.push(2.0 * series[1]);
        for (i, &r) in grid.nodes().iter().enumerate() {
            f.push(q[i]);
            d1.push(dq[i]);
            d2.push(second_derivative(r, q[i], dq[i]));
        }
        let interp = Hermite5::new(xs, f, d1, d2);
        let (tail_amplitude, decay_rate) = fit_tail(grid.nodes(), &q);
        let mut profile = Self {
            grid,
            tol,
            center,
            series,
            tail_amplitude,
            decay_rate,
            residual_sup: 0.0,
            interp,
        };
        profile.residual_sup = profile.collocation_residual();
        Ok(profile)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn r_max(&self) -> f64 {
        self.grid.r_max()
    }

    /// `Q(0)`.
    pub fn center_value(&self) -> f64 {
        self.center
    }

    /// Even Taylor coefficients of `Q` at the origin.
    pub fn series(&self) -> &[f64] {
        &self.series
    }

    /// Fitted `ν` in `Q ≈ a e^{-νr}/r`.
    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    /// Fitted `a` in `Q ≈ a e^{-νr}/r`.
    pub fn tail_amplitude(&self) -> f64 {
        self.tail_amplitude
    }

    /// Sup-norm of `Q'' + 2Q'/r - Q + Q³` for the stored interpolant,
    /// sampled at interval midpoints.
    pub fn residual_sup(&self) -> f64 {
        self.residual_sup
    }

    pub fn q(&self) -> &[f64] {
        &self.interp.values()[1..]
    }

    pub fn dq(&self) -> &[f64] {
        &self.interp.first()[1..]
    }

    pub fn interpolant(&self) -> &Hermite5 {
        &self.interp
    }

    /// Interior sign changes of `Q` on the grid.
    pub fn node_count(&self) -> usize {
        self.q().windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
    }

    /// `Q` and `Q'` at `r >= 0`; beyond `r_max` the fitted tail is used.
    pub fn q_at(&self, r: f64) -> QPoint {
        if r > self.r_max() {
            let q = self.tail_amplitude * (-self.decay_rate * r).exp() / r;
            return QPoint { q, dq: -q * (self.decay_rate + 1.0 / r), extrapolated: true };
        }
        let [q, dq, _] = self.interp.eval(r.max(0.0));
        QPoint { q, dq, extrapolated: false }
    }

    /// `Q(r)²`, the potential shape shared by every operator.
    #[inline]
    pub fn q_squared(&self, r: f64) -> f64 {
        let q = self.q_at(r).q;
        q * q
    }

    /// `∫₀^∞ f(Q, Q', r) r² dr`, with the part beyond `r_max` taken from the
    /// fitted exponential tail.
    pub fn q_quadrature<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64, f64, f64) -> f64,
    {
        let r_max = self.r_max();
        let truncated = self.interp.integrate(0.0, r_max, |r, q, dq| f(q, dq, r) * r * r);
        let tail = gauss_legendre_composite(r_max, r_max + 40.0, 80, |r| {
            let p = self.q_at(r);
            f(p.q, p.dq, r) * r * r
        });
        if !tail.is_finite() || tail.abs() > TAIL_SHARE * truncated.abs() {
            return Err(Error::NonDecaying { tail, truncated });
        }
        Ok(truncated + tail)
    }

    fn collocation_residual(&self) -> f64 {
        let xs = self.interp.xs();
        let mut sup = 0.0f64;
        for w in xs.windows(2) {
            let r = 0.5 * (w[0] + w[1]);
            let [q, dq, ddq] = self.interp.eval(r);
            let res = ddq + 2.0 * dq / r - q + q * q * q;
            sup = sup.max(res.abs());
        }
        sup
    }

    /// Serializes the profile as the versioned cache table.
    pub fn to_cache_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {CACHE_VERSION}");
        for (key, value) in self.header() {
            let _ = writeln!(out, "# {key} = {}", fmt17(value));
        }
        let _ = writeln!(out, "# columns: r,Q,Q'");
        for ((r, q), dq) in self.grid.nodes().iter().zip(self.q()).zip(self.dq()) {
            let _ = writeln!(out, "{},{},{}", fmt17(*r), fmt17(*q), fmt17(*dq));
        }
        out
    }

    fn header(&self) -> [(&'static str, f64); 7] {
        [
            ("tol", self.tol),
            ("r_max", self.r_max()),
            ("center_value", self.center),
            ("decay_rate", self.decay_rate),
            ("tail_amplitude", self.tail_amplitude),
            ("residual_sup", self.residual_sup),
            ("nodes", self.grid.len() as f64),
        ]
    }

    /// Parses a cache table written by [`QProfile::to_cache_string`].
    pub fn from_cache_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(first) if first.trim_start_matches('#').trim() == CACHE_VERSION => {}
            other => return Err(Error::Parse(format!("unexpected version line {other:?}"))),
        }
        let mut header = BTreeMap::new();
        let (mut r, mut q, mut dq) = (Vec::new(), Vec::new(), Vec::new());
        for line in lines {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    let v: f64 = v.trim().parse().map_err(|e| Error::Parse(format!("{k}: {e}")))?;
                    header.insert(k.trim().to_string(), v);
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("bad row {line:?}")));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
            r.push(parse(fields[0])?);
            q.push(parse(fields[1])?);
            dq.push(parse(fields[2])?);
        }
        let get = |k: &str| {
            header.get(k).copied().ok_or_else(|| Error::Parse(format!("missing header {k}")))
        };
        if get("nodes")? as usize != r.len() {
            return Err(Error::Parse("row count does not match header".into()));
        }
        let grid = RadialGrid::new(r)?;
        let mut profile = Self::assemble(grid, get("tol")?, get("center_value")?, q, dq)?;
        // Header values are authoritative so a reload is bit-identical.
        profile.decay_rate = get("decay_rate")?;
        profile.tail_amplitude = get("tail_amplitude")?;
        profile.residual_sup = get("residual_sup")?;
        Ok(profile)
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_cache_string())?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        Self::from_cache_str(&std::fs::read_to_string(path)?)
    }
}

/// Loads the profile cached at `path` if its key `(tol, grid)` matches,
/// otherwise solves and writes it.
pub fn load_or_solve(path: &Path, tol: f64, grid: &RadialGrid) -> Result<QProfile> {
    if path.exists() {
        if let Ok(profile) = QProfile::read_cache(path) {
            if profile.tol == tol && profile.grid == *grid {
                return Ok(profile);
            }
        }
    }
    let profile = solve_ground_state(tol, grid)?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    profile.write_cache(path)?;
    Ok(profile)
}

/// Formats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Least-squares fit of `ln(r Q) = ln a - ν r` over the last tenth of the
/// grid.
fn fit_tail(nodes: &[f64], q: &[f64]) -> (f64, f64) {
    let r_max = *nodes.last().unwrap();
    let from = 0.9 * r_max;
    let pts: Vec<(f64, f64)> = nodes
        .iter()
        .zip(q)
        .filter(|(r, q)| **r >= from && **q > 0.0)
        .map(|(r, q)| (*r, (r * q).ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    ((my - slope * mx).exp(), -slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances::{DEFAULT_RMAX, DEFAULT_TOL, PROFILE_STEP};
    use std::sync::OnceLock;

    fn profile() -> &'static QProfile {
        static P: OnceLock<QProfile> = OnceLock::new();
        P.get_or_init(|| {
            let grid = RadialGrid::uniform(PROFILE_STEP, DEFAULT_RMAX).unwrap();
            solve_ground_state(DEFAULT_TOL, &grid).unwrap()
        })
    }

    #[test]
    fn series_solves_equation() {
        let a = center_series(4.3);
        // Q'' + 2Q'/r - Q + Q^3 should be O(r^8) for small r.
        let r = 1e-2;
        let h = 1e-4;
        let q = |x: f64| series_eval(&a, x).0;
        let ddq = (q(r + h) - 2.0 * q(r) + q(r - h)) / (h * h);
        let (qv, dqv) = series_eval(&a, r);
        assert!((ddq + 2.0 * dqv / r - qv + qv.powi(3)).abs() < 1e-5);
    }

    #[test]
    fn profile_is_positive_and_decreasing() {
        let p = profile();
        assert!(p.q().iter().all(|&q| q > 0.0));
        assert!(p.dq().iter().all(|&dq| dq < 0.0));
        assert_eq!(p.node_count(), 0);
        assert!(p.residual_sup() < 1e-8, "residual {:e}", p.residual_sup());
        assert!((p.decay_rate() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn shots_straddle_the_center_value() {
        let p = profile();
        let b = p.center_value();
        let nodes = p.grid().nodes();
        assert_eq!(shoot(b * (1.0 + 1e-6), nodes, 1e-11, false).unwrap().class, ShotClass::Crossed);
        assert_eq!(shoot(b * (1.0 - 1e-6), nodes, 1e-11, false).unwrap().class, ShotClass::NotCrossed);
    }

    #[test]
    fn q_at_nodes_and_origin() {
        let p = profile();
        let i = 1234;
        let r = p.grid().nodes()[i];
        let pt = p.q_at(r);
        assert_eq!(pt.q, p.q()[i]);
        assert_eq!(pt.dq, p.dq()[i]);
        let origin = p.q_at(0.0);
        assert_eq!((origin.q, origin.dq), (p.center_value(), 0.0));
        assert!(!origin.extrapolated);
        let far = p.q_at(35.0);
        assert!(far.extrapolated && far.q > 0.0 && far.dq < 0.0);
    }

    #[test]
    fn nehari_identity_holds() {
        let p = profile();
        let lhs = p.q_quadrature(|q, dq, _| dq * dq + q * q).unwrap();
        let rhs = p.q_quadrature(|q, _, _| q.powi(4)).unwrap();
        assert!(rhs > 0.0);
        assert!(((lhs - rhs) / rhs).abs() < 1e-7);
    }

    #[test]
    fn non_decaying_integrand_is_rejected() {
        assert!(matches!(profile().q_quadrature(|_, _, _| 1.0), Err(Error::NonDecaying { .. })));
    }

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let p = profile();
        let text = p.to_cache_string();
        let back = QProfile::from_cache_str(&text).unwrap();
        assert_eq!(&back, p);
        assert_eq!(back.to_cache_string(), text);
    }

    #[test]
    fn rejects_short_domain_and_loose_config() {
        let grid = RadialGrid::uniform(0.01, 10.0).unwrap();
        assert!(matches!(solve_ground_state(1e-11, &grid), Err(Error::Config(_))));
        let grid = RadialGrid::uniform(0.01, 30.0).unwrap();
        assert!(matches!(solve_ground_state(1e-13, &grid), Err(Error::Config(_))));
    }
}
