//! Symmetric tridiagonal eigen-engine with Sturm counting.
//!
//! On nodes `r_i = i h`, `i = 1 .. n-1`, with Dirichlet conditions at `0`
//! and `r_max`, the reduced equation `-u'' + V u = λ u` is discretized as
//!
//! `T(λ) u = λ u`,  `T(λ) = -D₂ + diag(V + h²/12 (V - λ)²)`.
//!
//! The diagonal correction cancels the leading `h²/12 u''''` term of the
//! three-point second difference, which leaves an error whose first-order
//! eigenvalue contribution integrates to zero. In the regular sector the
//! eigenvalue error is `O(h⁴)`; with a centrifugal term it is close to
//! `O(h³)`. Because `T(λ) - λ` is decreasing in `λ` wherever `h² |V - λ|`
//! is small, its negative-pivot count is a valid eigenvalue counter.

use crate::error::{Error, Result};
use crate::ode::{RadialGrid, RadialSolution};
use crate::operators::OperatorSpec;

/// Pivot magnitude substituted for an exact zero.
const PIVOT_FLOOR: f64 = 1e-300;
const INVERSE_ITERATIONS: usize = 3;

#[derive(Debug, Clone)]
pub struct Discretization {
    step: f64,
    r_max: f64,
    // Interior nodes only.
    nodes: Vec<f64>,
    potential: Vec<f64>,
}

impl Discretization {
    pub fn new(op: &OperatorSpec, step: f64) -> Result<Self> {
        let r_max = op.r_max();
        let n = (r_max / step).round() as usize;
        if n < 3 || ((n as f64) * step - r_max).abs() > 1e-9 * r_max {
            return Err(Error::Config(format!(
                "step {step} does not divide r_max {r_max}"
            )));
        }
        let nodes: Vec<f64> = (1..n).map(|i| i as f64 * step).collect();
        let potential = nodes.iter().map(|&r| op.potential(r)).collect();
        Ok(Self { step, r_max, nodes, potential })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    fn shifted_diagonal(&self, i: usize, lambda: f64) -> f64 {
        let h2 = self.step * self.step;
        let v = self.potential[i] - lambda;
        2.0 / h2 + v + h2 / 12.0 * v * v
    }

    /// Number of discrete eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let off2 = self.step.powi(-4);
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            q = self.shifted_diagonal(i, lambda) - if i == 0 { 0.0 } else { off2 / q };
            if q == 0.0 {
                q = -PIVOT_FLOOR;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th eigenvalue (0-based) inside `(lo, hi)`, located by
    /// bisection on the count until the bracket is floating-point adjacent.
    fn locate(&self, index: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Inverse iteration on `T(λ) - λ`. Returns interior values.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let off = -1.0 / (self.step * self.step);
        let diag: Vec<f64> = (0..n).map(|i| self.shifted_diagonal(i, lambda)).collect();
        // LDLᵀ factorization of the tridiagonal matrix.
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n];
        for i in 0..n {
            d[i] = diag[i] - if i == 0 { 0.0 } else { l[i] * l[i] * d[i - 1] };
            if d[i].abs() < PIVOT_FLOOR {
                d[i] = PIVOT_FLOOR;
            }
            if i + 1 < n {
                l[i + 1] = off / d[i];
            }
        }
        let mut x = vec![1.0; n];
        for _ in 0..INVERSE_ITERATIONS {
            for i in 1..n {
                x[i] -= l[i] * x[i - 1];
            }
            for i in 0..n {
                x[i] /= d[i];
            }
            for i in (0..n - 1).rev() {
                x[i] -= l[i + 1] * x[i + 1];
            }
            let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }

    /// Eigenfunction sampled on `h, 2h, ..., r_max` with unit `∫u² dr` and
    /// positive initial slope.
    fn eigenfunction(&self, lambda: f64) -> Result<RadialSolution> {
        let mut u = self.eigenvector(lambda);
        u.push(0.0);
        let h = self.step;
        let norm = (h * u.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let sign = if u[0] < 0.0 { -1.0 } else { 1.0 };
        u.iter_mut().for_each(|v| *v *= sign / norm);
        let n = u.len();
        let at = |i: isize| if i < 0 { 0.0 } else { u[i as usize] };
        let du: Vec<f64> = (0..n as isize)
            .map(|i| {
                if i as usize + 1 == n {
                    (at(i) - at(i - 1)) / h
                } else {
                    (at(i + 1) - at(i - 1)) / (2.0 * h)
                }
            })
            .collect();
        let mut potential = self.potential.clone();
        potential.push(*potential.last().unwrap());
        let ddu = u.iter().zip(&potential).map(|(v, p)| (p - lambda) * v).collect();
        let grid = RadialGrid::uniform(h, self.r_max)?;
        let origin = [0.0, (4.0 * u[0] - u[1]) / (2.0 * h), 0.0];
        RadialSolution::from_samples(grid, u, du, ddu, origin)
    }
}

/// An eigenpair of the discretized operator.
#[derive(Debug, Clone)]
pub(crate) struct DiscreteEigen {
    pub eigenvalue: f64,
    pub node_count: usize,
    pub eigenfunction: RadialSolution,
}

/// All discrete eigenvalues in `(lo, hi)`, ascending.
pub(crate) fn discrete_spectrum(disc: &Discretization, lo: f64, hi: f64) -> Result<Vec<DiscreteEigen>> {
    let first = disc.count_below(lo);
    let last = disc.count_below(hi);
    let mut out = Vec::with_capacity(last.saturating_sub(first));
    for index in first..last {
        let eigenvalue = disc.locate(index, lo, hi);
        let eigenfunction = disc.eigenfunction(eigenvalue)?;
        let node_count = significant_sign_changes(eigenfunction.u());
        out.push(DiscreteEigen { eigenvalue, node_count, eigenfunction });
    }
    Ok(out)
}

/// Sign changes among entries above `1e-10` of the maximum magnitude, so
/// that rounding noise in the far tail is not counted.
pub(crate) fn significant_sign_changes(u: &[f64]) -> usize {
    let floor = 1e-10 * u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in u {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && last.signum() != v.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bare discretization of `-u'' + V u` for a given potential.
    fn raw(step: f64, r_max: f64, v: impl Fn(f64) -> f64) -> Discretization {
        let n = (r_max / step).round() as usize;
        let nodes: Vec<f64> = (1..n).map(|i| i as f64 * step).collect();
        let potential = nodes.iter().map(|&r| v(r)).collect();
        Discretization { step, r_max, nodes, potential }
    }

    #[test]
    fn box_spectrum_is_fourth_order() {
        // -u'' on (0, π): eigenvalues k².
        let pi = std::f64::consts::PI;
        let errs: Vec<f64> = [pi / 100.0, pi / 200.0]
            .iter()
            .map(|&h| {
                let d = raw(h, pi, |_| 0.0);
                let e = discrete_spectrum(&d, 0.5, 10.0).unwrap();
                assert_eq!(e.len(), 3);
                (e[2].eigenvalue - 9.0).abs()
            })
            .collect();
        // Leading error of the corrected scheme for sin(k r) is k⁶ h⁴ / 360.
        let leading = 729.0 * (pi / 200.0f64).powi(4) / 360.0;
        assert!((errs[1] / leading - 1.0).abs() < 0.05, "{} vs {leading}", errs[1]);
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 3.5, "observed order {order}");
    }

    #[test]
    fn harmonic_oscillator_levels_and_nodes() {
        // -u'' + r² u on the half line with u(0) = 0: odd levels 3, 7, 11.
        let d = raw(2e-3, 12.0, |r| r * r);
        let e = discrete_spectrum(&d, 0.0, 12.0).unwrap();
        let expected = [3.0, 7.0, 11.0];
        assert_eq!(e.len(), 3);
        for (k, (got, want)) in e.iter().zip(expected).enumerate() {
            assert!((got.eigenvalue - want).abs() < 1e-8, "{} vs {want}", got.eigenvalue);
            assert_eq!(got.node_count, k);
        }
        let ground = &e[0].eigenfunction;
        assert!(ground.u().iter().all(|v| *v >= -1e-12));
        let norm = ground.interpolant().integrate(0.0, 12.0, |_, v, _| v * v);
        assert!((norm - 1.0).abs() < 1e-5);
    }

    #[test]
    fn count_is_monotone() {
        let d = raw(5e-3, 10.0, |r| -5.0 * (-r).exp());
        let mut last = 0;
        for k in 0..60 {
            let c = d.count_below(-5.0 + k as f64 * 0.1);
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn noise_is_ignored_in_node_count() {
        assert_eq!(significant_sign_changes(&[0.0, 1.0, 0.5, 1e-13, -1e-13, 1e-14]), 0);
        assert_eq!(significant_sign_changes(&[1.0, -1.0, 1.0]), 2);
    }
}
