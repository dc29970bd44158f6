//! Reference computations that share no code with the library: a Numerov
//! collocation solve for the ground state, a second-order finite-difference
//! eigenvalue count, and fixed-step RK4 for threshold solutions.

#![allow(dead_code)]

/// Ground state on a uniform grid, stored as `u = r Q`.
pub struct Collocated {
    pub h: f64,
    pub u: Vec<f64>,
}

impl Collocated {
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// `Q` at node `i`, with the origin value from the series `u = a r + b r³`.
    pub fn q(&self, i: usize) -> f64 {
        if i == 0 {
            self.center_value()
        } else {
            self.u[i] / self.r(i)
        }
    }

    pub fn center_value(&self) -> f64 {
        let h = self.h;
        (4.0 * self.u[1] / h - self.u[2] / (2.0 * h)) / 3.0
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }
}

/// Solves `u'' = u - u³/r²`, `u(0) = u(R) = 0` on the Numerov
/// discretization by Petviashvili iteration: with `L = -u'' + u` and
/// `N(u) = u³/r²`, iterate `u ← M^{3/2} L⁻¹ N(u)`, `M = ⟨Lu, u⟩ / ⟨N(u), u⟩`.
pub fn numerov_ground_state(h: f64, r_max: f64) -> Collocated {
    let n = (r_max / h).round() as usize;
    let m = n - 1;
    let c = h * h / 12.0;
    let r: Vec<f64> = (1..n).map(|i| i as f64 * h).collect();
    // Numerov: (c B - Δ) u = c B N(u), B = tridiag(1, 10, 1).
    let (diag, off) = (2.0 + 10.0 * c, -1.0 + c);
    let apply = |v: &[f64], d: f64, o: f64| -> Vec<f64> {
        (0..m)
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < m { v[i + 1] } else { 0.0 };
                d * v[i] + o * (left + right)
            })
            .collect()
    };
    let sub = vec![off; m];
    let main = vec![diag; m];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut v: Vec<f64> = r.iter().map(|&x| x * (-x).exp()).collect();
    for _ in 0..2000 {
        let nl: Vec<f64> = v.iter().zip(&r).map(|(u, x)| u * u * u / (x * x)).collect();
        let rhs: Vec<f64> = apply(&nl, 10.0 * c, c);
        let factor = (dot(&apply(&v, diag, off), &v) / dot(&rhs, &v)).powf(1.5);
        let next: Vec<f64> = thomas(&sub, &main, &sub, &rhs).into_iter().map(|x| factor * x).collect();
        let change = next.iter().zip(&v).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        v = next;
        if change < 1e-13 {
            break;
        }
    }
    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    u.extend(v);
    u.push(0.0);
    Collocated { h, u }
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// `Q(0)` extrapolated from collocation at `h` and `h/2`.
pub fn oracle_center_value(h: f64, r_max: f64) -> f64 {
    let coarse = numerov_ground_state(h, r_max).center_value();
    let fine = numerov_ground_state(h / 2.0, r_max).center_value();
    (16.0 * fine - coarse) / 15.0
}

/// Number of eigenvalues below `lambda` of the three-point discretization of
/// `-u'' + (1 + ℓ(ℓ+1)/r² - c Q²) u` with Dirichlet ends.
pub fn fd_count_below(q: &Collocated, coupling: f64, ell: u32, lambda: f64) -> usize {
    let h = q.h;
    let mu = (ell * (ell + 1)) as f64;
    let off = 1.0 / (h * h);
    let mut count = 0;
    let mut pivot = 1.0;
    for i in 1..q.len() - 1 {
        let r = q.r(i);
        let qi = q.q(i);
        let d = 2.0 / (h * h) + 1.0 + mu / (r * r) - coupling * qi * qi - lambda;
        pivot = if i == 1 { d } else { d - off * off / pivot };
        if pivot == 0.0 {
            pivot = -f64::EPSILON * off;
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest eigenvalue of the discretization by bisection on the count.
pub fn fd_bottom_eigenvalue(q: &Collocated, coupling: f64, ell: u32) -> f64 {
    let q0 = q.center_value();
    let (mut lo, mut hi) = (1.0 - coupling * q0 * q0 - 1.0, 1.0);
    while hi - lo > 1e-13 * (1.0 + lo.abs()) {
        let mid = 0.5 * (lo + hi);
        if fd_count_below(q, coupling, ell, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bottom eigenvalue extrapolated from steps `h, h/2, h/4` (error `h²`,
/// then `h⁴`).
pub fn oracle_bottom_eigenvalue(h: f64, r_max: f64, coupling: f64) -> f64 {
    let e: Vec<f64> = [h, h / 2.0, h / 4.0]
        .iter()
        .map(|&s| fd_bottom_eigenvalue(&numerov_ground_state(s, r_max), coupling, 0))
        .collect();
    let a = (4.0 * e[1] - e[0]) / 3.0;
    let b = (4.0 * e[2] - e[1]) / 3.0;
    (16.0 * b - a) / 15.0
}

/// `F(r)` on the even nodes of `q` for `F'' = (μ/r² - c Q²) F`, `F(0) = 0`,
/// `F'(0) = -1`, by RK4 with step `2h`.
pub fn rk4_threshold(q: &Collocated, coupling: f64, ell: u32) -> Vec<(f64, f64)> {
    let mu = (ell * (ell + 1)) as f64;
    let h = 2.0 * q.h;
    let w = |i: usize| {
        let r = q.r(i);
        let qi = q.q(i);
        let centrifugal = if mu == 0.0 { 0.0 } else { mu / (r * r) };
        centrifugal - coupling * qi * qi
    };
    let rhs = |i: usize, y: [f64; 2]| [y[1], w(i) * y[0]];
    // For ℓ = 0 the right-hand side is regular at the origin.
    assert_eq!(ell, 0, "origin start implemented for the radial sector");
    let mut y = [0.0, -1.0];
    let mut out = vec![(0.0, 0.0)];
    let mut i = 0;
    while i + 2 < q.len() {
        let k1 = rhs(i, y);
        let k2 = rhs(i + 1, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(i + 1, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(i + 2, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for j in 0..2 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        i += 2;
        out.push((q.r(i), y[0]));
    }
    out
}

/// Least-squares slope of `(r, F)` pairs with `r` in `[a, b]`.
pub fn tail_slope(samples: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let pts: Vec<&(f64, f64)> = samples.iter().filter(|(r, _)| *r >= a && *r <= b).collect();
    let n = pts.len() as f64;
    let mr = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mf = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mr) * (p.1 - mf)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mr).powi(2)).sum();
    sxy / sxx
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    dot(a, b) / (dot(a, a) * dot(b, b)).sqrt()
}
