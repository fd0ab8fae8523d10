//! Composite Gauss–Legendre quadrature on a truncated interval.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights replicated over uniform subintervals of
/// `[a, b]`. With `q` points per subinterval the rule integrates polynomials
/// of degree `2q - 1` exactly on each subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    interval: (f64, f64),
    subintervals: usize,
    points_per_subinterval: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Reference Gauss–Legendre rule on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence; nodes ascending, symmetrized about 0.
fn legendre_rule(q: usize) -> (Vec<f64>, Vec<f64>) {
    let n = q;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // initial guess (descending in i), Abramowitz & Stegun 22.16.6
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_p_dp(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d) = legendre_p_dp(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // store ascending; enforce exact symmetry
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n` and derivative at `x` via the three-term
/// recurrence; valid for interior points `|x| < 1`.
fn legendre_p_dp(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Builds the composite grid: the reference rule mapped affinely onto each of
/// the `subintervals` uniform pieces of `[a, b]`.
pub fn gauss_legendre_grid(
    a: f64,
    b: f64,
    subintervals: usize,
    points_per_subinterval: usize,
) -> Result<QuadratureGrid> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::arg(format!("invalid interval [{a}, {b}]")));
    }
    if subintervals < 1 || points_per_subinterval < 1 {
        return Err(Error::arg("subdivision counts must be at least 1"));
    }
    let (ref_nodes, ref_weights) = legendre_rule(points_per_subinterval);
    let h = (b - a) / subintervals as f64;
    let mut nodes = Vec::with_capacity(subintervals * points_per_subinterval);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for s in 0..subintervals {
        let left = a + s as f64 * h;
        let mid = left + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in ref_nodes.iter().zip(&ref_weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    Ok(QuadratureGrid {
        interval: (a, b),
        subintervals,
        points_per_subinterval,
        nodes,
        weights,
    })
}

impl QuadratureGrid {
    /// The default experiment grid: `[-10, 10]`, 30 subintervals, 30 points each.
    pub fn default_box() -> QuadratureGrid {
        gauss_legendre_grid(-10.0, 10.0, 30, 30).expect("static parameters are valid")
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn subintervals(&self) -> usize {
        self.subintervals
    }

    pub fn points_per_subinterval(&self) -> usize {
        self.points_per_subinterval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
