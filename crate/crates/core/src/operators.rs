//! Scalar radial operators `-Δ + 1 - c Q²`, their angular sectors, and the
//! 2×2 operators of the coupled system.
//!
//! In the reduced variable `u = r ψ` the sector-`ℓ` eigenvalue equation
//! `(-Δ + 1 - c Q²) ψ = λ ψ` reads
//!
//! `u'' = (1 - λ + ℓ(ℓ+1)/r² - c Q²) u`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::QProfile;
use crate::ode::{OriginSeries, RadialGrid};

/// Coupling `(3 - β)/(1 + β)` of the scalar operator in the β family.
pub fn coupling_coefficient(beta: f64) -> Result<f64> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("mixing parameter must be >= 0, got {beta}")));
    }
    Ok((3.0 - beta) / (1.0 + beta))
}

/// Inverse of [`coupling_coefficient`] on `c ∈ (0, 3]`.
pub fn effective_beta(coupling: f64) -> Result<f64> {
    if !(coupling > 0.0 && coupling <= 3.0) {
        return Err(Error::Domain(format!("coupling must lie in (0, 3], got {coupling}")));
    }
    Ok((3.0 - coupling) / (1.0 + coupling))
}

/// A scalar radial operator `-Δ + 1 - c Q²` restricted to one angular sector.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    coupling: f64,
    ell: u32,
    profile: Arc<QProfile>,
}

impl OperatorSpec {
    /// Any finite `c >= 0` is accepted; couplings outside `(0, 3]` are only
    /// meaningful as controls.
    pub fn new(coupling: f64, ell: u32, profile: Arc<QProfile>) -> Result<Self> {
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return Err(Error::Domain(format!("coupling must be finite and >= 0, got {coupling}")));
        }
        Ok(Self { coupling, ell, profile })
    }

    pub fn from_beta(beta: f64, ell: u32, profile: Arc<QProfile>) -> Result<Self> {
        Self::new(coupling_coefficient(beta)?, ell, profile)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Angular eigenvalue `ℓ(ℓ+1)`.
    pub fn sector(&self) -> f64 {
        let l = self.ell as f64;
        l * (l + 1.0)
    }

    pub fn profile(&self) -> &QProfile {
        &self.profile
    }

    pub fn shared_profile(&self) -> Arc<QProfile> {
        Arc::clone(&self.profile)
    }

    pub fn r_max(&self) -> f64 {
        self.profile.r_max()
    }

    /// Same operator in another sector.
    pub fn with_ell(&self, ell: u32) -> Self {
        Self { coupling: self.coupling, ell, profile: Arc::clone(&self.profile) }
    }

    /// Potential `1 + ℓ(ℓ+1)/r² - c Q²` of the reduced operator `-d²/dr² + V`.
    #[inline]
    pub fn potential(&self, r: f64) -> f64 {
        1.0 + self.sector() / (r * r) - self.coupling * self.profile.q_squared(r)
    }

    /// Coefficient `W` of `u'' = W u` at spectral parameter `λ`.
    #[inline]
    pub fn weight(&self, r: f64, lambda: f64) -> f64 {
        self.potential(r) - lambda
    }

    /// Frobenius data of the regular solution at spectral parameter `λ`.
    pub fn origin_series(&self, lambda: f64) -> OriginSeries {
        let a = self.profile.series();
        let n = a.len();
        let mut weight = vec![0.0; n];
        for (i, ai) in a.iter().enumerate() {
            for (j, aj) in a.iter().enumerate().take(n - i) {
                weight[i + j] -= self.coupling * ai * aj;
            }
        }
        weight[0] += 1.0 - lambda;
        OriginSeries { ell: self.ell, weight }
    }
}

/// Discrete residual `u'' - W u` at the grid nodes `r_1 .. r_{n-1}` of a
/// uniform grid, with `u(0) = 0`. The last node has no right neighbour and
/// is omitted. Second differences are `O(h²)` accurate.
pub fn apply_radial(op: &OperatorSpec, grid: &RadialGrid, u: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if u.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: u.len() });
    }
    let h = grid
        .step()
        .ok_or_else(|| Error::Config("apply_radial needs a uniform grid".into()))?;
    let nodes = grid.nodes();
    let inv_h2 = 1.0 / (h * h);
    let mut out = Vec::with_capacity(u.len().saturating_sub(1));
    for i in 0..u.len().saturating_sub(1) {
        let left = if i == 0 { 0.0 } else { u[i - 1] };
        let d2 = (u[i + 1] - 2.0 * u[i] + left) * inv_h2;
        out.push(d2 - op.weight(nodes[i], lambda) * u[i]);
    }
    Ok(out)
}

/// Error bound for the three-point second difference of `u` sampled with
/// spacing `h`: the `h²/12 |u''''|` truncation term, with `u''''` estimated
/// from fourth differences, plus the rounding floor.
pub fn fd_error_bound(u: &[f64], h: f64) -> f64 {
    let d4 = u
        .windows(5)
        .map(|w| (w[0] - 4.0 * w[1] + 6.0 * w[2] - 4.0 * w[3] + w[4]).abs())
        .fold(0.0, f64::max)
        / h.powi(4);
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    2.0 * h * h / 12.0 * d4 + 16.0 * f64::EPSILON * scale / (h * h)
}

/// `((h₁ + h₂)/√2, (h₁ - h₂)/√2)`; an involution and an isometry.
pub fn w_transform(first: &[f64], second: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if first.len() != second.len() {
        return Err(Error::GridMismatch { expected: first.len(), got: second.len() });
    }
    let plus = first.iter().zip(second).map(|(a, b)| (a + b) * FRAC_1_SQRT_2).collect();
    let minus = first.iter().zip(second).map(|(a, b)| (a - b) * FRAC_1_SQRT_2).collect();
    Ok((plus, minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    /// Linearization at the symmetric two-component solution.
    Coupled,
    /// Its diagonal form.
    Diagonal,
    /// Linearization at the one-component solution `(Q, 0)`.
    Standard,
    /// Linearization of the system with self-couplings `μ₁, μ₂`.
    Generalized,
}

/// `-Δ + 1 - M Q²` with a constant symmetric 2×2 coupling matrix `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixOperatorSpec {
    pub kind: MatrixKind,
    pub diagonal: [f64; 2],
    pub off_diagonal: f64,
}

impl MatrixOperatorSpec {
    pub fn coupled(beta: f64) -> Result<Self> {
        coupling_coefficient(beta)?;
        Ok(Self {
            kind: MatrixKind::Coupled,
            diagonal: [(3.0 + beta) / (1.0 + beta); 2],
            off_diagonal: 2.0 * beta / (1.0 + beta),
        })
    }

    pub fn diagonal(beta: f64) -> Result<Self> {
        Ok(Self {
            kind: MatrixKind::Diagonal,
            diagonal: [3.0, coupling_coefficient(beta)?],
            off_diagonal: 0.0,
        })
    }

    pub fn standard(beta: f64) -> Result<Self> {
        coupling_coefficient(beta)?;
        Ok(Self { kind: MatrixKind::Standard, diagonal: [3.0, beta], off_diagonal: 0.0 })
    }

    pub fn generalized(mu1: f64, mu2: f64, beta: f64) -> Result<Self> {
        let r = general_reduction(mu1, mu2, beta)?;
        Ok(Self {
            kind: MatrixKind::Generalized,
            diagonal: [r.matrix[0][0], r.matrix[1][1]],
            off_diagonal: r.matrix[0][1],
        })
    }

    /// Eigenvalues of the coupling matrix, descending.
    pub fn couplings(&self) -> [f64; 2] {
        symmetric_eigen([[self.diagonal[0], self.off_diagonal], [self.off_diagonal, self.diagonal[1]]]).0
    }

    /// Discrete action on a pair sampled on a uniform grid with `u(0) = 0`,
    /// reduced variables, at nodes `r_1 .. r_{n-1}`.
    pub fn apply(&self, profile: &QProfile, grid: &RadialGrid, u: (&[f64], &[f64])) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = grid.len();
        for len in [u.0.len(), u.1.len()] {
            if len != n {
                return Err(Error::GridMismatch { expected: n, got: len });
            }
        }
        let h = grid
            .step()
            .ok_or_else(|| Error::Config("matrix operators need a uniform grid".into()))?;
        let nodes = grid.nodes();
        let second = |v: &[f64], i: usize| {
            let left = if i == 0 { 0.0 } else { v[i - 1] };
            (v[i + 1] - 2.0 * v[i] + left) / (h * h)
        };
        let mut a = Vec::with_capacity(n - 1);
        let mut b = Vec::with_capacity(n - 1);
        for (i, &r) in nodes[..n - 1].iter().enumerate() {
            let q2 = profile.q_squared(r);
            let (x, y) = (u.0[i], u.1[i]);
            a.push(-second(u.0, i) + x - q2 * (self.diagonal[0] * x + self.off_diagonal * y));
            b.push(-second(u.1, i) + y - q2 * (self.off_diagonal * x + self.diagonal[1] * y));
        }
        Ok((a, b))
    }
}

/// Max discrepancy of `W 𝓛 W` against the diagonal operator on a test pair.
pub fn conjugation_check(beta: f64, profile: &QProfile, grid: &RadialGrid, test: (&[f64], &[f64])) -> Result<f64> {
    let coupled = MatrixOperatorSpec::coupled(beta)?;
    let diagonal = MatrixOperatorSpec::diagonal(beta)?;
    let (w1, w2) = w_transform(test.0, test.1)?;
    let (l1, l2) = coupled.apply(profile, grid, (&w1, &w2))?;
    let (c1, c2) = w_transform(&l1, &l2)?;
    let (d1, d2) = diagonal.apply(profile, grid, test)?;
    Ok(c1
        .iter()
        .zip(&d1)
        .chain(c2.iter().zip(&d2))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Reduction of the system with self-couplings `μ₁, μ₂` at `(√k Q, √l Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub k: f64,
    pub l: f64,
    /// Jacobian of the nonlinearity divided by `Q²`.
    pub matrix: [[f64; 2]; 2],
    /// Eigenvalues of `matrix`, descending.
    pub couplings: [f64; 2],
    /// Eigenvectors matching `couplings`.
    pub channels: [[f64; 2]; 2],
    /// The closed form `3(μ₁-β)(μ₂-β)/(μ₁μ₂-β²)` quoted for the second coupling.
    pub quoted_coupling: f64,
    /// Distance from `quoted_coupling` to the nearest computed coupling.
    pub quoted_discrepancy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum ReductionOutcome {
    Positive(Reduction),
    /// The linear system has a solution but a component is not positive.
    NoPositiveReduction { k: f64, l: f64 },
}

/// Solves `k μ₁ + l β = 1, k β + l μ₂ = 1` and diagonalizes the linearization.
pub fn general_reduction(mu1: f64, mu2: f64, beta: f64) -> Result<Reduction> {
    match reduce(mu1, mu2, beta)? {
        ReductionOutcome::Positive(r) => Ok(r),
        ReductionOutcome::NoPositiveReduction { k, l } => Err(Error::Domain(format!(
            "no positive reduction: k = {k}, l = {l}"
        ))),
    }
}

/// Like [`general_reduction`] but reports non-positive `k, l` as an outcome.
pub fn reduce(mu1: f64, mu2: f64, beta: f64) -> Result<ReductionOutcome> {
    let det = mu1 * mu2 - beta * beta;
    let scale = (mu1 * mu2).abs().max(beta * beta).max(f64::MIN_POSITIVE);
    if !det.is_finite() || det.abs() <= 1e-14 * scale {
        return Err(Error::Numeric(format!(
            "singular reduction system: mu1 = {mu1}, mu2 = {mu2}, beta = {beta}"
        )));
    }
    let k = (mu2 - beta) / det;
    let l = (mu1 - beta) / det;
    if !(k > 0.0 && l > 0.0) {
        return Ok(ReductionOutcome::NoPositiveReduction { k, l });
    }
    // d/du of (μ₁u₁³ + βu₁u₂², μ₂u₂³ + βu₁²u₂) at (√k Q, √l Q), over Q².
    let matrix = [
        [3.0 * mu1 * k + beta * l, 2.0 * beta * (k * l).sqrt()],
        [2.0 * beta * (k * l).sqrt(), 3.0 * mu2 * l + beta * k],
    ];
    let (couplings, channels) = symmetric_eigen(matrix);
    let quoted_coupling = 3.0 * (mu1 - beta) * (mu2 - beta) / det;
    let quoted_discrepancy = couplings
        .iter()
        .map(|c| (c - quoted_coupling).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(ReductionOutcome::Positive(Reduction {
        k,
        l,
        matrix,
        couplings,
        channels,
        quoted_coupling,
        quoted_discrepancy,
    }))
}

/// Eigenvalues (descending) and unit eigenvectors of a symmetric 2×2 matrix
/// by a single Jacobi rotation.
pub fn symmetric_eigen(m: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let (c, s) = if b == 0.0 {
        (1.0, 0.0)
    } else {
        let tau = (d - a) / (2.0 * b);
        let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
        let t = if tau == 0.0 { 1.0 } else { t };
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, t * c)
    };
    let e1 = c * c * a - 2.0 * s * c * b + s * s * d;
    let e2 = s * s * a + 2.0 * s * c * b + c * c * d;
    let v1 = [c, -s];
    let v2 = [s, c];
    if e1 >= e2 {
        ([e1, e2], [v1, v2])
    } else {
        ([e2, e1], [v2, v1])
    }
}
