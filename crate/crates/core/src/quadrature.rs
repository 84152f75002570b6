//! Gauss–Legendre quadrature rules.
//!
//! Nodes are roots of the Legendre polynomial `P_n`, found by Newton
//! iteration from the Chebyshev-like initial guesses; weights follow from
//! the derivative values. Rules are returned on the reference interval
//! `[0, 1]` since every integral in this crate is set up per element.

/// A quadrature rule on `[0, 1]`: `∫₀¹ f ≈ Σ w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    /// Nodes in `(0, 1)`, increasing.
    pub nodes: Vec<f64>,
    /// Positive weights summing to 1.
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss–Legendre rule with `n ≥ 1` points, exact for polynomials of
    /// degree `2n − 1`.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Work on [-1, 1]; exploit symmetry by computing the upper half.
        let m = n.div_ceil(2);
        for i in 0..m {
            // Initial guess for the i-th root from the top (decreasing x).
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_and_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        if n % 2 == 1 {
            // Middle node sits exactly at zero.
            nodes[n / 2] = 0.0;
            let (_, dp) = legendre_and_derivative(n, 0.0);
            weights[n / 2] = 2.0 / (dp * dp);
        }
        // Map [-1, 1] -> [0, 1].
        for i in 0..n {
            nodes[i] = 0.5 * (nodes[i] + 1.0);
            weights[i] *= 0.5;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[l, r]` with this rule.
    pub fn integrate(&self, l: f64, r: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = r - l;
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(l + len * x);
        }
        acc * len
    }
}

/// Evaluate `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
