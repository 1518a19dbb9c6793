//! Left-sided Riemann–Liouville integral and derivative on sampled data.
//!
//! Both operators treat the data as piecewise linear between grid points and
//! integrate the power kernel exactly against each linear piece.

use crate::error::{Error, Result};
use crate::frac::{FracOrder, HurstParam, SampledFunction};
use crate::quadrature::{integrate, integrate_power, rule};
use crate::special::{beta, gamma};

fn check_origin(f: &SampledFunction, a: f64) -> Result<()> {
    let g0 = f.grid()[0];
    if (g0 - a).abs() > 1e-12 * (1.0 + a.abs()) {
        return Err(Error::Grid(format!("operator base point {a} must equal the first grid point {g0}")));
    }
    Ok(())
}

/// Weights `(u, v)` of `∫_{x-A}^{x-B} (x-y)^{α-1} ℓ(y) dy = u f_left + v f_right`
/// for the linear interpolant `ℓ` on a cell of length `h = A - B`.
#[inline]
fn int_cell(alpha: f64, a_dist: f64, b_dist: f64) -> (f64, f64) {
    let h = a_dist - b_dist;
    let p0 = (a_dist.powf(alpha) - b_dist.powf(alpha)) / alpha;
    let p1 = a_dist * p0 - (a_dist.powf(alpha + 1.0) - b_dist.powf(alpha + 1.0)) / (alpha + 1.0);
    (p0 - p1 / h, p1 / h)
}

/// `I^α_{a+} f` at every grid point; `a` must be the first grid point.
pub fn frac_int_left(alpha: FracOrder, f: &SampledFunction, a: f64) -> Result<SampledFunction> {
    check_origin(f, a)?;
    f.check_finite("fractional integral input")?;
    let al = alpha.value();
    let x = f.grid();
    let v = f.values();
    let norm = 1.0 / gamma(al);
    let mut out = vec![0.0; x.len()];
    for i in 1..x.len() {
        let mut acc = 0.0;
        for j in 0..i {
            let (u, w) = int_cell(al, x[i] - x[j], x[i] - x[j + 1]);
            acc += u * v[j] + w * v[j + 1];
        }
        out[i] = acc * norm;
    }
    Ok(f.with_values(out))
}

/// `D^α_{a+} f` at every grid point in Marchaud form; `a` must be the first grid point.
///
/// Exact for linear data on each cell. At `x = a` the value of the first
/// interior point is returned. `alpha = 1` gives the backward difference.
pub fn frac_deriv_left(alpha: FracOrder, f: &SampledFunction, a: f64) -> Result<SampledFunction> {
    check_origin(f, a)?;
    f.check_finite("fractional derivative input")?;
    let x = f.grid();
    let v = f.values();
    let n = x.len();
    if n < 2 {
        return Err(Error::Grid("derivative needs at least two grid points".into()));
    }
    let al = alpha.value();
    let mut out = vec![0.0; n];
    if al == 1.0 {
        for i in 1..n {
            out[i] = (v[i] - v[i - 1]) / (x[i] - x[i - 1]);
        }
    } else {
        let norm = 1.0 / gamma(1.0 - al);
        for i in 1..n {
            let xi = x[i];
            let mut acc = v[i] / (xi - x[0]).powf(al);
            let last_h = xi - x[i - 1];
            let slope = (v[i] - v[i - 1]) / last_h;
            let mut integral = slope * last_h.powf(1.0 - al) / (1.0 - al);
            for j in 0..i - 1 {
                let ad = xi - x[j];
                let bd = xi - x[j + 1];
                let h = ad - bd;
                let q0 = (bd.powf(-al) - ad.powf(-al)) / al;
                let q1 = ad * q0 - (ad.powf(1.0 - al) - bd.powf(1.0 - al)) / (1.0 - al);
                integral += (v[i] - v[j]) * q0 - (v[j + 1] - v[j]) / h * q1;
            }
            acc += al * integral;
            out[i] = acc * norm;
        }
    }
    out[0] = out[1];
    Ok(f.with_values(out))
}

/// Precomputed `I^α_{0+}` on a uniform grid of `n + 1` points with step `h`.
///
/// Coefficients depend only on the index distance, so one application costs
/// `O(n^2)` multiply-adds and no transcendental calls.
#[derive(Debug, Clone)]
pub struct UniformFracIntegral {
    // left/right end weights for a cell at index distance m (m = 1..=n)
    left: Vec<f64>,
    right: Vec<f64>,
}

impl UniformFracIntegral {
    pub fn new(alpha: FracOrder, n: usize, h: f64) -> Self {
        let al = alpha.value();
        let norm = h.powf(al) / gamma(al);
        let mut left = vec![0.0; n + 1];
        let mut right = vec![0.0; n + 1];
        for m in 1..=n {
            let (u, w) = int_cell(al, m as f64, m as f64 - 1.0);
            left[m] = u * norm;
            right[m] = w * norm;
        }
        Self { left, right }
    }

    pub fn points(&self) -> usize {
        self.left.len()
    }

    /// Value at grid index `i` only.
    #[inline]
    pub fn at(&self, values: &[f64], i: usize) -> f64 {
        let mut acc = 0.0;
        for j in 0..i {
            let m = i - j;
            acc += self.left[m] * values[j] + self.right[m] * values[j + 1];
        }
        acc
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        (0..values.len()).map(|i| self.at(values, i)).collect()
    }
}

/// Leading constant of the inverse operator applied to a constant derivative:
/// `φ' = 1` maps to `C s^{1/2-h}` with `C = Γ(3/2-h)/Γ(2-2h)`.
pub fn kh_inverse_constant(h: HurstParam) -> f64 {
    let h = h.value();
    gamma(1.5 - h) / gamma(2.0 - 2.0 * h)
}

/// Factor `1/(c_h Γ(h+1/2))` that turns [`kh_inverse_ac`] into a right inverse
/// of `h ↦ ∫_0^t K(t,s) h(s) ds` with the normalized kernel [`kernel_kh`].
///
/// [`kernel_kh`]: crate::frac::kernel_kh
pub fn kh_inverse_scale(h: HurstParam) -> f64 {
    1.0 / (crate::frac::c_h(h) * gamma(h.value() + 0.5))
}

/// `∫_0^1 (r-y)^{α-1} y^g dy` for `r >= 1`.
///
/// `r = 1` is a Beta function; `r >= 2` uses the binomial series of
/// `(1 - y/r)^{α-1}`, which converges at least like `2^{-n}`. The remaining
/// case only occurs on non-uniform grids and falls back to split quadrature.
fn power_moment(alpha: f64, g: f64, r: f64) -> f64 {
    if r == 1.0 {
        return beta(alpha, g + 1.0);
    }
    if r >= 2.0 {
        let mut coeff = 1.0;
        let mut sum = 0.0;
        let inv = 1.0 / r;
        let mut pw = 1.0;
        for n in 0..200 {
            let term = coeff * pw / (g + n as f64 + 1.0);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
            coeff *= (n as f64 + 1.0 - alpha) / (n as f64 + 1.0);
            pw *= inv;
        }
        return r.powf(alpha - 1.0) * sum;
    }
    let d = r - 1.0;
    let left = integrate_power(g, 0.0, 0.5, |y| (r - y).powf(alpha - 1.0), 64);
    let right = integrate(|w| (d + w).powf(alpha - 1.0) * (1.0 - w).powf(g), 0.0, 0.5, 64);
    left + right
}

/// `∫_0^h (x-y)^{α-1} y^β (1 - y/h, y/h) dy` for `x >= h`.
fn first_cell(alpha: f64, beta_exp: f64, x: f64, h: f64) -> (f64, f64) {
    let r = if (x - h).abs() <= 1e-14 * x { 1.0 } else { x / h };
    let scale = h.powf(alpha + beta_exp);
    let m0 = power_moment(alpha, beta_exp, r);
    let m1 = power_moment(alpha, beta_exp + 1.0, r);
    ((m0 - m1) * scale, m1 * scale)
}

/// `∫_{yl}^{yr} (x-y)^{α-1} y^β (left, right hat) dy` for `x >= yr`.
fn weighted_cell(alpha: f64, beta_exp: f64, x: f64, yl: f64, yr: f64) -> (f64, f64) {
    if yl == 0.0 {
        return first_cell(alpha, beta_exp, x, yr);
    }
    let h = yr - yl;
    let dist = x - yr;
    if dist >= h {
        let mut u = 0.0;
        let mut v = 0.0;
        let r = rule(24);
        for (&t, &w) in r.nodes.iter().zip(&r.weights) {
            let y = yl + h * t;
            let k = w * h * (x - y).powf(alpha - 1.0) * y.powf(beta_exp);
            u += k * (1.0 - t);
            v += k * t;
        }
        return (u, v);
    }
    if dist <= 1e-14 * x && h <= 0.5 * yr {
        // adjacent cell: expand (yr - g)^β in g = yr - y, ratio h/yr <= 1/2
        let mut u = 0.0;
        let mut v = 0.0;
        let mut c = yr.powf(beta_exp);
        let mut hp = h.powf(alpha);
        for n in 0..200 {
            let nf = n as f64;
            let a0 = c * hp / (alpha + nf);
            let a1 = c * hp / (alpha + nf + 1.0);
            u += a1;
            v += a0 - a1;
            if a0.abs() < 1e-17 * (u.abs() + v.abs()) {
                break;
            }
            c *= -(beta_exp - nf) / ((nf + 1.0) * yr);
            hp *= h;
        }
        return (u, v);
    }
    // non-uniform grids only
    let u = integrate_power(alpha - 1.0, dist, dist + h, |g| (yr + dist - g).powf(beta_exp) * (g - dist) / h, 64);
    let v = integrate_power(alpha - 1.0, dist, dist + h, |g| (yr + dist - g).powf(beta_exp) * (1.0 - (g - dist) / h), 64);
    (u, v)
}

/// Inverse of the Volterra operator on absolutely continuous functions:
/// `s^{h-1/2} I^{1/2-h}_{0+}( s^{1/2-h} φ' )(s)` on the grid of `phi_prime`.
///
/// `φ'` is treated as piecewise linear and the weight `s^{1/2-h}` is
/// integrated exactly together with the kernel.
pub fn kh_inverse_ac(h: HurstParam, phi_prime: &SampledFunction) -> Result<SampledFunction> {
    let x = phi_prime.grid();
    if x[0] != 0.0 {
        return Err(Error::Grid(format!("inverse operator needs a grid starting at 0, got {}", x[0])));
    }
    phi_prime.check_finite("inverse operator input")?;
    let al = 0.5 - h.value();
    let p = phi_prime.values();
    let norm = 1.0 / gamma(al);
    let mut out = vec![0.0; x.len()];
    for i in 1..x.len() {
        let mut acc = 0.0;
        for j in 0..i {
            let (u, v) = weighted_cell(al, al, x[i], x[j], x[j + 1]);
            acc += u * p[j] + v * p[j + 1];
        }
        out[i] = x[i].powf(-al) * acc * norm;
    }
    Ok(phi_prime.with_values(out))
}

/// [`kh_inverse_ac`] precomputed for a uniform grid `k * step`, `k = 0..=n`.
///
/// Holds a triangular table of `n(n+3)/2` coefficients.
#[derive(Debug, Clone)]
pub struct UniformKhInverse {
    scale: f64,
    // row i (1..=n) starts at offset[i] and holds i+1 coefficients
    offset: Vec<usize>,
    table: Vec<f64>,
}

impl UniformKhInverse {
    pub fn new(h: HurstParam, n: usize, step: f64) -> Self {
        let al = 0.5 - h.value();
        let norm = 1.0 / gamma(al);
        let mut offset = vec![0; n + 1];
        let mut table = Vec::with_capacity(n * (n + 3) / 2);
        for i in 1..=n {
            offset[i] = table.len();
            let start = table.len();
            table.resize(start + i + 1, 0.0);
            let xi = i as f64;
            let row = &mut table[start..];
            for j in 0..i {
                let (u, v) = weighted_cell(al, al, xi, j as f64, j as f64 + 1.0);
                row[j] += u;
                row[j + 1] += v;
            }
            let w = xi.powf(-al) * norm;
            row.iter_mut().for_each(|c| *c *= w);
        }
        Self {
            scale: step.powf(al),
            offset,
            table,
        }
    }

    /// Value at grid index `i` from derivative samples `phi_prime[0..=i]`.
    #[inline]
    pub fn at(&self, phi_prime: &[f64], i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let row = &self.table[self.offset[i]..self.offset[i] + i + 1];
        row.iter().zip(phi_prime).map(|(c, p)| c * p).sum::<f64>() * self.scale
    }

    pub fn apply(&self, phi_prime: &[f64]) -> Vec<f64> {
        (0..phi_prime.len()).map(|i| self.at(phi_prime, i)).collect()
    }
}
