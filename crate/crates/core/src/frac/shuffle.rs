//! Numerical check of the shuffle identity
//! `∫f1 · ∫f2 = ∫_θ^t (f1(s)∫_θ^s f2 + f2(s)∫_θ^s f1) ds`.
//!
//! Both sides are evaluated exactly for the piecewise-linear interpolants of
//! the samples, so the two agree to rounding error.

use crate::error::{Error, Result};
use crate::frac::SampledFunction;

fn locate(grid: &[f64], x: f64) -> Result<usize> {
    let tol = 1e-12 * (1.0 + x.abs());
    grid.iter()
        .position(|&g| (g - x).abs() <= tol)
        .ok_or_else(|| Error::Domain(format!("{x} is not a grid point")))
}

/// Returns `(product of integrals, iterated-integral sum)` over `[theta, t]`.
pub fn shuffle_check(f1: &SampledFunction, f2: &SampledFunction, theta: f64, t: f64) -> Result<(f64, f64)> {
    if f1.grid() != f2.grid() {
        return Err(Error::Grid("shuffle check needs both functions on one grid".into()));
    }
    if !(theta < t) {
        return Err(Error::Domain(format!("need theta < t, got {theta} >= {t}")));
    }
    f1.check_finite("shuffle input")?;
    f2.check_finite("shuffle input")?;
    let x = f1.grid();
    let (lo, hi) = (locate(x, theta)?, locate(x, t)?);
    let (a, b) = (f1.values(), f2.values());

    let (mut int1, mut int2, mut rhs) = (0.0, 0.0, 0.0);
    for j in lo..hi {
        let h = x[j + 1] - x[j];
        let mid1 = 0.5 * (a[j] + a[j + 1]);
        let mid2 = 0.5 * (b[j] + b[j + 1]);
        let half1 = int1 + 0.5 * h * (0.75 * a[j] + 0.25 * a[j + 1]);
        let half2 = int2 + 0.5 * h * (0.75 * b[j] + 0.25 * b[j + 1]);
        let end1 = int1 + 0.5 * h * (a[j] + a[j + 1]);
        let end2 = int2 + 0.5 * h * (b[j] + b[j + 1]);
        let g_left = a[j] * int2 + b[j] * int1;
        let g_mid = mid1 * half2 + mid2 * half1;
        let g_right = a[j + 1] * end2 + b[j + 1] * end1;
        // integrand is cubic on the cell, so Simpson is exact
        rhs += h / 6.0 * (g_left + 4.0 * g_mid + g_right);
        int1 = end1;
        int2 = end2;
    }
    Ok((int1 * int2, rhs))
}
