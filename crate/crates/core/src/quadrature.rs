//! Gauss-Legendre quadrature on arbitrary intervals.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
//! iteration on the three-term recurrence from the Chebyshev-based initial
//! guess `cos(pi (i - 1/4) / (n + 1/2))`; weights are `2 / ((1 - x^2) P_n'(x)^2)`.
//! Rules are cached per order.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

/// Nodes and weights on the reference interval `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// `P_n(x)` and `P_n'(x)` via the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k_f = k as f64;
        let p_next = ((2.0 * k_f + 1.0) * x * p - k_f * p_prev) / (k_f + 1.0);
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1).
    let deriv = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, deriv)
}

impl GaussLegendre {
    /// The `order`-point rule (exact for polynomials of degree `2*order - 1`).
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be at least 1");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n_f = order as f64;
        // Roots come in +/- pairs; solve the positive half and mirror.
        for i in 0..order.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n_f + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(order, x);
                deriv = dp;
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                    let (p2, dp2) = legendre_with_deriv(order, x);
                    deriv = dp2;
                    x -= p2 / dp2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
            nodes[order - 1 - i] = x;
            weights[order - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        // Odd order: the middle node is exactly 0.
        if order % 2 == 1 {
            let mid = order / 2;
            nodes[mid] = 0.0;
            let (_, dp) = legendre_with_deriv(order, 0.0);
            weights[mid] = 2.0 / (dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached rule shared across calls (rules are immutable once built).
    pub fn cached(order: usize) -> GaussLegendre {
        static CACHE: OnceLock<Mutex<HashMap<usize, GaussLegendre>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry(order).or_insert_with(|| GaussLegendre::new(order)).clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate `f` over `[a, b]` by mapping the reference rule affinely.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Integrate over `[center - radius, center + radius]` split at the
/// center, with the same rule applied to each half.  Splitting keeps
/// full accuracy when `f` has a kink or parity structure at the center.
pub fn integrate_split<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    center: f64,
    radius: f64,
    mut f: F,
) -> f64 {
    rule.integrate(center - radius, center, &mut f) + rule.integrate(center, center + radius, &mut f)
}
