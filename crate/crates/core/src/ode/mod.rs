//! Adaptive integration of reduced radial equations `u'' = W(r) u`.
//!
//! Radial problems are always posed for `u = r psi`, which removes the
//! first-order `2/r` term. Near the origin the regular solution is started
//! from its Frobenius series (see [`origin_start`]).

mod dopri;

pub(crate) use dopri::{Dopri5, RunEnd, State};

use crate::error::{Error, Result};
use crate::hermite::Hermite5;
use crate::tolerances::{ORIGIN_SERIES_MAX, TOL_RANGE, ZERO_TOL};

/// Strictly increasing sample radii on `(0, r_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Config("empty radial grid".into()));
        }
        if nodes[0] <= 0.0 {
            return Err(Error::Config(format!(
                "first grid node must be positive, got {}",
                nodes[0]
            )));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) || nodes.iter().any(|r| !r.is_finite()) {
            return Err(Error::Config("grid nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    /// Nodes `step, 2 step, ..., r_max`. `r_max` must be a whole number of
    /// steps (to within 1e-9 relative).
    pub fn uniform(step: f64, r_max: f64) -> Result<Self> {
        if !(step > 0.0) || !(r_max > step) {
            return Err(Error::Config(format!(
                "invalid uniform grid: step {step}, r_max {r_max}"
            )));
        }
        let n = (r_max / step).round() as usize;
        if ((n as f64) * step - r_max).abs() > 1e-9 * r_max {
            return Err(Error::Config(format!(
                "r_max {r_max} is not a multiple of step {step}"
            )));
        }
        let mut nodes: Vec<f64> = (1..=n).map(|k| k as f64 * step).collect();
        nodes[n - 1] = r_max;
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Spacing if the grid is `k h`, `k = 1..n`.
    pub fn step(&self) -> Option<f64> {
        let h = self.nodes[0];
        let uniform = self
            .nodes
            .iter()
            .enumerate()
            .all(|(k, &r)| (r - (k + 1) as f64 * h).abs() <= 1e-9 * r.max(1.0));
        uniform.then_some(h)
    }

    fn truncated(&self, len: usize) -> Self {
        Self { nodes: self.nodes[..len].to_vec() }
    }
}

/// Sampled solution of a reduced radial equation together with its limits
/// at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    grid: RadialGrid,
    // Index 0 holds the r = 0 limits, indices 1.. the grid nodes.
    interp: Hermite5,
}

impl RadialSolution {
    /// Builds a solution from node samples and the `(u, u', u'')` limits at
    /// `r = 0`.
    pub fn from_samples(
        grid: RadialGrid,
        u: Vec<f64>,
        du: Vec<f64>,
        ddu: Vec<f64>,
        origin: [f64; 3],
    ) -> Result<Self> {
        for len in [u.len(), du.len(), ddu.len()] {
            if len != grid.len() {
                return Err(Error::GridMismatch { expected: grid.len(), got: len });
            }
        }
        let mut xs = Vec::with_capacity(grid.len() + 1);
        xs.push(0.0);
        xs.extend_from_slice(grid.nodes());
        let prepend = |o: f64, v: Vec<f64>| {
            let mut out = Vec::with_capacity(v.len() + 1);
            out.push(o);
            out.extend(v);
            out
        };
        let interp = Hermite5::new(
            xs,
            prepend(origin[0], u),
            prepend(origin[1], du),
            prepend(origin[2], ddu),
        );
        Ok(Self { grid, interp })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.interp.values()[1..]
    }

    pub fn du(&self) -> &[f64] {
        &self.interp.first()[1..]
    }

    pub fn ddu(&self) -> &[f64] {
        &self.interp.second()[1..]
    }

    /// `(u, u', u'')` limits at the origin.
    pub fn origin(&self) -> [f64; 3] {
        [self.interp.values()[0], self.interp.first()[0], self.interp.second()[0]]
    }

    pub fn interpolant(&self) -> &Hermite5 {
        &self.interp
    }

    /// `(u, u')` at any radius in `[0, r_max]` by quintic Hermite
    /// interpolation; exact at nodes.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let [v, dv, _] = self.interp.eval(r);
        (v, dv)
    }

    /// Interior sign changes of `u` on `(0, r_max)`, each refined by
    /// bisection on the interpolant.
    pub fn zeros(&self) -> Vec<f64> {
        let xs = self.interp.xs();
        let vs = self.interp.values();
        let mut out = Vec::new();
        // Skip the origin sample: u(0) = 0 for regular solutions.
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..xs.len() {
            let v = vs[i];
            if v == 0.0 {
                continue;
            }
            if let Some((r_prev, v_prev)) = prev {
                if v_prev.signum() != v.signum() {
                    out.push(self.bisect_zero(r_prev, xs[i]));
                }
            }
            prev = Some((xs[i], v));
        }
        out
    }

    /// Number of interior sign changes of `u`.
    pub fn node_count(&self) -> usize {
        let mut count = 0;
        let mut last = 0.0f64;
        for &v in self.u() {
            if v == 0.0 {
                continue;
            }
            if last != 0.0 && last.signum() != v.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }

    fn bisect_zero(&self, mut lo: f64, mut hi: f64) -> f64 {
        let f_lo = self.eval(lo).0;
        while hi - lo > ZERO_TOL * 0.5 {
            let mid = 0.5 * (lo + hi);
            let f_mid = self.eval(mid).0;
            if f_mid == 0.0 {
                return mid;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Result of a sampled integration.
#[derive(Debug, Clone)]
pub enum Integration {
    Complete(RadialSolution),
    /// `|u|` overflowed; the partial solution covers the nodes reached.
    BlowUp { last_radius: f64, partial: Option<RadialSolution> },
}

impl Integration {
    pub fn is_complete(&self) -> bool {
        matches!(self, Integration::Complete(_))
    }

    pub fn solution(&self) -> Option<&RadialSolution> {
        match self {
            Integration::Complete(s) => Some(s),
            Integration::BlowUp { partial, .. } => partial.as_ref(),
        }
    }

    /// The complete solution, or a numeric error on blow-up.
    pub fn into_complete(self) -> Result<RadialSolution> {
        match self {
            Integration::Complete(s) => Ok(s),
            Integration::BlowUp { last_radius, .. } => Err(Error::Numeric(format!(
                "solution overflowed at r = {last_radius}"
            ))),
        }
    }
}

/// Initial data at the first integration radius plus the origin limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartData {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub origin: [f64; 3],
}

/// Power-series description of the regular solution near `r = 0` of
///
/// `psi'' + (2/r) psi' - (l(l+1)/r^2) psi = w(r) psi`,
///
/// with `w(r) = sum_k weight[k] r^(2k)` even and analytic.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginSeries {
    pub ell: u32,
    pub weight: Vec<f64>,
}

impl OriginSeries {
    /// Coefficients `c_n` of `u = r^(l+1) sum_n c_n r^(2n)` with `c_0 = 1`.
    pub fn coefficients(&self, terms: usize) -> Vec<f64> {
        let l = self.ell as f64;
        let mut c = vec![0.0; terms.max(1)];
        c[0] = 1.0;
        for n in 1..c.len() {
            let mut acc = 0.0;
            for j in 0..n {
                if let Some(w) = self.weight.get(j) {
                    acc += w * c[n - 1 - j];
                }
            }
            let nf = n as f64;
            c[n] = acc / (2.0 * nf * (2.0 * l + 2.0 * nf + 1.0));
        }
        c
    }
}

/// Regularized start for `u = r psi` at `r0`, normalized so that
/// `psi ~ amplitude r^l` as `r -> 0`.
pub fn origin_start(series: &OriginSeries, amplitude: f64, r0: f64) -> Result<StartData> {
    if !(r0 > 0.0) || r0 > ORIGIN_SERIES_MAX {
        return Err(Error::Config(format!(
            "series start radius {r0} outside (0, {ORIGIN_SERIES_MAX}]"
        )));
    }
    let terms = series.weight.len().max(3) + 1;
    let c = series.coefficients(terms);
    let p = series.ell as f64 + 1.0;
    let (mut u, mut du) = (0.0, 0.0);
    for (n, cn) in c.iter().enumerate() {
        let e = p + 2.0 * n as f64;
        u += cn * r0.powf(e);
        du += cn * e * r0.powf(e - 1.0);
    }
    let origin = match series.ell {
        0 => [0.0, amplitude, 0.0],
        1 => [0.0, 0.0, 2.0 * amplitude],
        _ => [0.0, 0.0, 0.0],
    };
    Ok(StartData { r: r0, u: amplitude * u, du: amplitude * du, origin })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        return Err(Error::Config(format!(
            "integrator tolerance {tol:e} outside [{:e}, {:e}]",
            TOL_RANGE.0, TOL_RANGE.1
        )));
    }
    Ok(())
}

/// Integrates `u'' = W(r) u` from the origin data `(u(0), u'(0))` across
/// `grid`. `W` must be finite at `r = 0`; singular weights need
/// [`integrate_from`] with an [`origin_start`].
pub fn integrate<W>(weight: W, init: (f64, f64), grid: &RadialGrid, tol: f64) -> Result<Integration>
where
    W: Fn(f64) -> f64,
{
    let w0 = weight(0.0);
    if !w0.is_finite() {
        return Err(Error::Config("weight is singular at the origin".into()));
    }
    let start = StartData { r: 0.0, u: init.0, du: init.1, origin: [init.0, init.1, w0 * init.0] };
    integrate_from(weight, start, grid, tol)
}

/// Integrates `u'' = W(r) u` from arbitrary start data across every grid
/// node beyond `start.r`.
pub fn integrate_from<W>(weight: W, start: StartData, grid: &RadialGrid, tol: f64) -> Result<Integration>
where
    W: Fn(f64) -> f64,
{
    check_tol(tol)?;
    if start.r >= grid.nodes()[0] {
        return Err(Error::Config(format!(
            "start radius {} must precede the first node {}",
            start.r,
            grid.nodes()[0]
        )));
    }
    let n = grid.len();
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    let mut ddu = Vec::with_capacity(n);
    let rhs = |r: f64, y: &State| [y[1], weight(r) * y[0]];
    let end = Dopri5::new(tol).run(rhs, start.r, [start.u, start.du], grid.nodes(), |r, y| {
        u.push(y[0]);
        du.push(y[1]);
        ddu.push(weight(r) * y[0]);
        true
    })?;
    let reached = u.len();
    match end {
        RunEnd::BlowUp(last_radius) => {
            let partial = if reached == 0 {
                None
            } else {
                Some(RadialSolution::from_samples(grid.truncated(reached), u, du, ddu, start.origin)?)
            };
            Ok(Integration::BlowUp { last_radius, partial })
        }
        _ => Ok(Integration::Complete(RadialSolution::from_samples(
            grid.clone(),
            u,
            du,
            ddu,
            start.origin,
        )?)),
    }
}

/// Carries `(u, u')` from `r0` to `r1` (either direction).
pub fn propagate<W>(weight: W, r0: f64, y0: (f64, f64), r1: f64, tol: f64) -> Result<(f64, f64)>
where
    W: Fn(f64) -> f64,
{
    check_tol(tol)?;
    let mut out = (f64::NAN, f64::NAN);
    let rhs = |r: f64, y: &State| [y[1], weight(r) * y[0]];
    let end = Dopri5::new(tol).run(rhs, r0, [y0.0, y0.1], &[r1], |_, y| {
        out = (y[0], y[1]);
        true
    })?;
    if let RunEnd::BlowUp(r) = end {
        return Err(Error::Numeric(format!("solution overflowed at r = {r}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(r_max: f64) -> RadialGrid {
        RadialGrid::uniform(0.05, r_max).unwrap()
    }

    #[test]
    fn harmonic_oscillator_is_sine() {
        let sol = integrate(|_| -1.0, (0.0, 1.0), &grid(10.0), 1e-12)
            .unwrap()
            .into_complete()
            .unwrap();
        let err = sol
            .grid()
            .nodes()
            .iter()
            .zip(sol.u())
            .map(|(r, u)| (u - r.sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "max error {err:e}");
        // Zeros at multiples of pi.
        let zeros = sol.zeros();
        assert_eq!(zeros.len(), 3);
        for (k, z) in zeros.iter().enumerate() {
            assert!((z - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-9);
        }
    }

    #[test]
    fn repulsive_weight_gives_sinh() {
        let sol = integrate(|_| 1.0, (0.0, 1.0), &grid(10.0), 1e-12)
            .unwrap()
            .into_complete()
            .unwrap();
        for (r, u) in sol.grid().nodes().iter().zip(sol.u()) {
            assert!((u / r.sinh() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_weight_keeps_constant() {
        let sol = integrate(|_| 0.0, (1.0, 0.0), &grid(10.0), 1e-12)
            .unwrap()
            .into_complete()
            .unwrap();
        assert!(sol.u().iter().all(|&u| (u - 1.0).abs() < 1e-14));
    }

    #[test]
    fn blow_up_reports_last_radius() {
        let g = RadialGrid::uniform(1.0, 400.0).unwrap();
        match integrate(|_| 16.0, (0.0, 1.0), &g, 1e-8).unwrap() {
            Integration::BlowUp { last_radius, partial } => {
                assert!(last_radius > 100.0 && last_radius < 200.0);
                assert!(partial.unwrap().u().iter().all(|u| u.is_finite()));
            }
            Integration::Complete(_) => panic!("expected blow-up"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate(|_| 0.0, (1.0, 0.0), &grid(1.0), 1e-3).is_err());
        assert!(integrate(|_| 0.0, (1.0, 0.0), &grid(1.0), 1e-15).is_err());
    }

    #[test]
    fn singular_weight_needs_series_start() {
        assert!(integrate(|r| 2.0 / (r * r), (0.0, 1.0), &grid(1.0), 1e-10).is_err());
    }

    #[test]
    fn free_regular_start_is_linear() {
        let s = origin_start(&OriginSeries { ell: 0, weight: vec![0.0] }, 1.0, 1e-4).unwrap();
        assert_eq!((s.u, s.du), (1e-4, 1.0));
    }

    #[test]
    fn p_wave_start_is_quadratic() {
        let s = origin_start(&OriginSeries { ell: 1, weight: vec![0.0] }, 1.0, 1e-3).unwrap();
        assert!((s.u - 1e-6).abs() < 1e-20);
        assert!((s.du - 2e-3).abs() < 1e-17);
        assert_eq!(s.origin, [0.0, 0.0, 2.0]);
    }

    #[test]
    fn series_start_radius_is_bounded() {
        let series = OriginSeries { ell: 0, weight: vec![1.0] };
        assert!(matches!(origin_start(&series, 1.0, 0.2), Err(Error::Config(_))));
    }

    #[test]
    fn series_matches_free_bessel_solution() {
        // w = 1, l = 0: u = sinh r.  l = 1: u = 3 (r cosh r - sinh r) / r.
        let s0 = origin_start(&OriginSeries { ell: 0, weight: vec![1.0] }, 1.0, 0.05).unwrap();
        assert!((s0.u - 0.05f64.sinh()).abs() < 1e-15);
        let s1 = origin_start(&OriginSeries { ell: 1, weight: vec![1.0] }, 1.0, 0.05).unwrap();
        // summed as 3 sum_n 2n r^{2n} / (2n+1)! to avoid cancellation
        let r = 0.05f64;
        let mut exact = 0.0;
        let mut fact = 1.0;
        for n in 1..12 {
            let k = 2 * n;
            fact *= (k * (k + 1)) as f64;
            exact += 3.0 * k as f64 * r.powi(k) / fact;
        }
        assert!((s1.u - exact).abs() < 1e-14 * exact.abs().max(1e-3));
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let w = |r: f64| 0.3 - 2.0 * (-r * r).exp();
        let tol = 1e-11;
        let fwd = propagate(w, 0.0, (0.0, 1.0), 8.0, tol).unwrap();
        let back = propagate(w, 8.0, fwd, 0.0, tol).unwrap();
        let scale = fwd.0.abs().max(fwd.1.abs());
        assert!(back.0.abs() < 10.0 * tol * scale);
        assert!((back.1 - 1.0).abs() < 10.0 * tol * scale);
    }

    #[test]
    fn halving_tolerance_converges() {
        let w = |r: f64| 0.5 - 3.0 / (1.0 + r * r);
        let a = propagate(w, 0.0, (0.0, 1.0), 15.0, 1e-8).unwrap();
        let b = propagate(w, 0.0, (0.0, 1.0), 15.0, 5e-9).unwrap();
        let scale = a.0.abs().max(a.1.abs());
        assert!((a.0 - b.0).abs() < 1e-8 * scale);
        assert!((a.1 - b.1).abs() < 1e-8 * scale);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn integration_is_linear(alpha in -50.0f64..50.0, slope in 0.1f64..3.0) {
            let w = |r: f64| 1.0 - 4.0 * (-r).exp();
            let g = grid(6.0);
            let base = integrate(w, (0.0, slope), &g, 1e-11).unwrap().into_complete().unwrap();
            let scaled = integrate(w, (0.0, alpha * slope), &g, 1e-11).unwrap().into_complete().unwrap();
            for (a, b) in base.u().iter().zip(scaled.u()) {
                prop_assert!((alpha * a - b).abs() <= 1e-11 * (alpha * a).abs().max(1e-12) * 10.0);
            }
        }
    }
}
