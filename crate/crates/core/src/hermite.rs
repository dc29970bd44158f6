//! Quintic Hermite interpolation of sampled smooth functions, and
//! Gauss-Legendre quadrature over the interpolant.
//!
//! Every sampled radial function in this crate carries its value together
//! with first and second derivatives (the second comes straight from the
//! ODE), so a quintic Hermite piece per interval is available for free and
//! is accurate to O(h^6).

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Applies 5-point Gauss-Legendre on `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite 5-point Gauss-Legendre with `pieces` equal panels.
pub fn gauss_legendre_composite<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    pieces: usize,
    mut f: F,
) -> f64 {
    let step = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + step * i as f64;
            gauss_legendre(lo, lo + step, &mut f)
        })
        .sum()
}

/// Piecewise quintic Hermite interpolant through `(x, f, f', f'')` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermite5 {
    xs: Vec<f64>,
    f: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Hermite5 {
    /// # Panics
    /// Panics if the sample vectors differ in length or hold fewer than two
    /// points.
    pub fn new(xs: Vec<f64>, f: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Self {
        assert!(xs.len() >= 2, "need at least two samples");
        assert!(f.len() == xs.len() && d1.len() == xs.len() && d2.len() == xs.len());
        Self { xs, f, d1, d2 }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn first(&self) -> &[f64] {
        &self.d1
    }

    pub fn second(&self) -> &[f64] {
        &self.d2
    }

    pub fn lower(&self) -> f64 {
        self.xs[0]
    }

    pub fn upper(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.xs.len();
        let idx = self.xs.partition_point(|&node| node <= x);
        idx.clamp(1, n - 1) - 1
    }

    /// Returns `[p, p', p'']` at `x`. Outside the sample range the end
    /// pieces are extended polynomially.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let i = self.interval(x);
        if x == self.xs[i] {
            return [self.f[i], self.d1[i], self.d2[i]];
        }
        if x == self.xs[i + 1] {
            return [self.f[i + 1], self.d1[i + 1], self.d2[i + 1]];
        }
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;

        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let g0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let g1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let g2 = 0.5 * (t3 - 2.0 * t4 + t5);

        let dh0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let dh1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let dh2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let dg0 = -dh0;
        let dg1 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let dg2 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);

        let ddh0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
        let ddh1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
        let ddh2 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
        let ddg0 = -ddh0;
        let ddg1 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
        let ddg2 = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);

        let (f0, f1) = (self.f[i], self.f[i + 1]);
        let (p0, p1) = (h * self.d1[i], h * self.d1[i + 1]);
        let (q0, q1) = (h * h * self.d2[i], h * h * self.d2[i + 1]);

        let v = f0 * h0 + p0 * h1 + q0 * h2 + f1 * g0 + p1 * g1 + q1 * g2;
        let dv = (f0 * dh0 + p0 * dh1 + q0 * dh2 + f1 * dg0 + p1 * dg1 + q1 * dg2) / h;
        let ddv = (f0 * ddh0 + p0 * ddh1 + q0 * ddh2 + f1 * ddg0 + p1 * ddg1 + q1 * ddg2)
            / (h * h);
        [v, dv, ddv]
    }

    /// Integrates `g(x, p(x), p'(x))` over `[a, b]` with one Gauss-Legendre
    /// panel per sample interval.
    pub fn integrate<G>(&self, a: f64, b: f64, mut g: G) -> f64
    where
        G: FnMut(f64, f64, f64) -> f64,
    {
        if b <= a {
            return 0.0;
        }
        let first = self.interval(a);
        let mut acc = 0.0;
        for i in first..self.xs.len() - 1 {
            let lo = self.xs[i].max(a);
            let hi = self.xs[i + 1].min(b);
            if hi > lo {
                acc += gauss_legendre(lo, hi, |x| {
                    let [v, dv, _] = self.eval(x);
                    g(x, v, dv)
                });
            }
            if self.xs[i + 1] >= b {
                break;
            }
        }
        acc
    }
}
