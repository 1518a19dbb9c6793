//! Gauss–Legendre rules and integrals with algebraic endpoint singularities.
//!
//! Endpoint singularities `y^e` (with `e > -1`) are removed by the substitution
//! `y = z^(1/(e+1))`, which turns `∫_0^L y^e f(y) dy` into
//! `(1/(e+1)) ∫_0^{L^(e+1)} f(z^(1/(e+1))) dz`. The integrand callbacks always
//! receive the distance from the singular endpoint so that callers never have
//! to recover it by cancellation.

use std::sync::OnceLock;

/// Nodes and weights on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const SIZES: [usize; 8] = [4, 8, 12, 16, 24, 32, 48, 64];
static RULES: [OnceLock<GaussRule>; 8] = [const { OnceLock::new() }; 8];

/// Cached rule with at least `n` points (capped at 64).
pub fn rule(n: usize) -> &'static GaussRule {
    let idx = SIZES.iter().position(|&s| s >= n).unwrap_or(SIZES.len() - 1);
    RULES[idx].get_or_init(|| legendre_rule(SIZES[idx]))
}

fn legendre_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    GaussRule { nodes, weights }
}

/// `∫_a^b f(x) dx` with an `n`-point rule.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let r = rule(n);
    let len = b - a;
    r.nodes
        .iter()
        .zip(&r.weights)
        .map(|(&x, &w)| w * f(a + len * x))
        .sum::<f64>()
        * len
}

/// `∫_{lo}^{hi} y^e f(y) dy` for `0 <= lo < hi`, exact in the `y^e` factor.
///
/// `f` is evaluated at the offset `y` itself.
pub fn integrate_power<F: FnMut(f64) -> f64>(e: f64, lo: f64, hi: f64, mut f: F, n: usize) -> f64 {
    debug_assert!(e > -1.0 && lo >= 0.0 && hi > lo);
    let q = e + 1.0;
    let p = 1.0 / q;
    let z_lo = lo.powf(q);
    let z_hi = hi.powf(q);
    integrate(|z| f(z.powf(p)), z_lo, z_hi, n) * p
}
