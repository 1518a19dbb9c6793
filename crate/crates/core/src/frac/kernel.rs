//! Covariance and square-root kernel of fractional Brownian motion.

use crate::error::{Error, Result};
use crate::frac::HurstParam;
use crate::quadrature::integrate_power;
use crate::special::{beta, gamma};

const INNER_NODES: usize = 32;

/// `E[B_t B_s] = (s^{2h} + t^{2h} - |t-s|^{2h}) / 2`.
pub fn cov_rh(h: HurstParam, t: f64, s: f64) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) {
        return Err(Error::Domain(format!("covariance needs t, s >= 0, got t={t}, s={s}")));
    }
    let e = 2.0 * h.value();
    Ok(0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e)))
}

/// Normalising constant of the kernel.
pub fn c_h(h: HurstParam) -> f64 {
    let h = h.value();
    (2.0 * h / ((1.0 - 2.0 * h) * beta(1.0 - 2.0 * h, h + 0.5))).sqrt()
}

/// Constant in front of the Malliavin weight, `1 / (c_h Γ(1/2+h) Γ(1/2-h))`.
pub fn big_c_h(h: HurstParam) -> f64 {
    let v = h.value();
    1.0 / (c_h(h) * gamma(0.5 + v) * gamma(0.5 - v))
}

/// Square-root kernel `K(t, s)` for `0 < s < t`.
pub fn kernel_kh(h: HurstParam, t: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && t > s && t.is_finite()) {
        return Err(Error::Domain(format!("kernel needs 0 < s < t, got t={t}, s={s}")));
    }
    Ok(VolterraKernel::new(h).eval(t, s, t - s))
}

/// `∫_0^{min(t,s)} K(t,u) K(s,u) du` by quadrature that resolves both endpoint
/// singularities; reproduces [`cov_rh`] up to quadrature error.
pub fn kernel_covariance(h: HurstParam, t: f64, s: f64) -> Result<f64> {
    if !(t > 0.0 && s > 0.0 && t.is_finite() && s.is_finite()) {
        return Err(Error::Domain(format!("kernel covariance needs t, s > 0, got t={t}, s={s}")));
    }
    let (hi, lo) = if t >= s { (t, s) } else { (s, t) };
    let k = VolterraKernel::new(h);
    let hv = h.value();
    let half = 0.5 * lo;
    let n = 64;
    // near u = 0 both factors behave like u^{h-1/2}
    let left = integrate_power(2.0 * hv - 1.0, 0.0, half, |u| {
        let w = u.powf(0.5 - hv);
        k.eval(hi, u, hi - u) * w * k.eval(lo, u, lo - u) * w
    }, n);
    // near u = lo the short kernel blows up like (lo-u)^{h-1/2}, the long one
    // too when hi == lo
    let same = hi == lo;
    let e = if same { 2.0 * hv - 1.0 } else { hv - 0.5 };
    let right = integrate_power(e, 0.0, half, |g| {
        let u = lo - g;
        let short = k.eval(lo, u, g) * g.powf(0.5 - hv);
        let long = if same {
            k.eval(hi, u, g) * g.powf(0.5 - hv)
        } else {
            k.eval(hi, u, hi - lo + g)
        };
        short * long
    }, n);
    Ok(left + right)
}

/// Kernel evaluator with the constants for one `h` cached.
#[derive(Debug, Clone, Copy)]
pub struct VolterraKernel {
    h: f64,
    c: f64,
    // ∫_{1/2}^1 x^{-2h}(1-x)^{h-1/2} dx
    upper_half: f64,
}

impl VolterraKernel {
    pub fn new(h: HurstParam) -> Self {
        let hv = h.value();
        let upper_half = integrate_power(hv - 0.5, 0.0, 0.5, |y| (1.0 - y).powf(-2.0 * hv), INNER_NODES);
        Self {
            h: hv,
            c: c_h(h),
            upper_half,
        }
    }

    pub fn hurst(&self) -> f64 {
        self.h
    }

    /// `K(t, s)` with the gap `t - s` supplied by the caller, which must be
    /// computed without cancellation when `s` is close to `t`.
    pub fn eval(&self, t: f64, s: f64, gap: f64) -> f64 {
        let h = self.h;
        let lead = (t / s).powf(h - 0.5) * gap.powf(h - 0.5);
        let tail = (0.5 - h) * s.powf(h - 0.5) * self.inner(s / t, gap / t);
        self.c * (lead + tail)
    }

    /// `∫_{lo}^1 x^{-2h}(1-x)^{h-1/2} dx`, with `rem = 1 - lo` passed separately.
    fn inner(&self, lo: f64, rem: f64) -> f64 {
        let h = self.h;
        if lo >= 0.5 {
            integrate_power(h - 0.5, 0.0, rem, |y| (1.0 - y).powf(-2.0 * h), INNER_NODES)
        } else {
            let left = integrate_power(-2.0 * h, lo, 0.5, |x| (1.0 - x).powf(h - 0.5), INNER_NODES);
            left + self.upper_half
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn hp(h: f64) -> HurstParam {
        HurstParam::new(h).unwrap()
    }

    #[test]
    fn constants_at_h_tenth() {
        assert!((c_h(hp(0.1)) - 0.357_685_77).abs() < 1e-7);
        assert!((big_c_h(hp(0.1)) - 0.846_359_33).abs() < 1e-7);
    }

    #[test]
    fn covariance_variance_and_symmetry() {
        let h = hp(0.2);
        assert!((cov_rh(h, 2.0, 2.0).unwrap() - 2f64.powf(0.4)).abs() < 1e-14);
        assert_eq!(cov_rh(h, 0.3, 0.7).unwrap(), cov_rh(h, 0.7, 0.3).unwrap());
        assert!(cov_rh(h, -1.0, 0.5).is_err());
    }

    #[test]
    fn covariance_examples() {
        let h = hp(0.1);
        assert!((cov_rh(h, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cov_rh(h, 1.0, 0.0).unwrap(), 0.0);
        assert!((cov_rh(h, 2.0, 1.0).unwrap() - 0.574_349_177_498_517_6).abs() < 1e-12);
        // self-similarity
        let (a, t, s): (f64, f64, f64) = (2.5, 0.4, 0.9);
        let lhs = cov_rh(h, a * t, a * s).unwrap();
        assert!((lhs - a.powf(0.2) * cov_rh(h, t, s).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn c_h_against_quadrature_beta() {
        // B(a,b) by splitting at 1/2 and removing both endpoint powers
        let beta_q = |a: f64, b: f64| {
            integrate_power(a - 1.0, 0.0, 0.5, |x| (1.0 - x).powf(b - 1.0), 64)
                + integrate_power(b - 1.0, 0.0, 0.5, |y| (1.0 - y).powf(a - 1.0), 64)
        };
        let h = 0.05;
        let expect = (2.0 * h / ((1.0 - 2.0 * h) * beta_q(1.0 - 2.0 * h, h + 0.5))).sqrt();
        assert!((c_h(hp(h)) - expect).abs() < 1e-10);
        for &h in &[0.05, 0.1, 0.3, 0.49] {
            let v = big_c_h(hp(h)) * c_h(hp(h)) * gamma(0.5 + h) * gamma(0.5 - h);
            assert!((v - 1.0).abs() < 1e-12);
            assert!(c_h(hp(h)).is_finite() && big_c_h(hp(h)) > 0.0);
        }
    }

    #[test]
    fn kernel_reproduces_covariance() {
        for &h in &[0.05, 0.1, 0.3] {
            for &(t, s) in &[(1.0, 1.0), (1.0, 0.5), (0.7, 0.3)] {
                let got = kernel_covariance(hp(h), t, s).unwrap();
                let want = cov_rh(hp(h), t, s).unwrap();
                assert!(((got - want) / want).abs() < 1e-3, "h={h} ({t},{s}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn kernel_domain() {
        let h = hp(0.1);
        assert!(kernel_kh(h, 1.0, 0.0).is_err());
        assert!(kernel_kh(h, 1.0, 1.0).is_err());
        assert!(kernel_kh(h, 1.0, 0.5).unwrap().is_finite());
    }

    // Independent oracle for the inner integral: plain midpoint rule on
    // ∫_s^t u^{h-3/2}(u-s)^{h-1/2} du after the substitution u - s = v^2,
    // which leaves a bounded integrand 2 v^{2h} (s+v^2)^{h-3/2}.
    fn inner_by_midpoint(h: f64, t: f64, s: f64) -> f64 {
        let n = 400_000;
        let top = (t - s).sqrt();
        let dv = top / n as f64;
        (0..n)
            .map(|i| {
                let v = (i as f64 + 0.5) * dv;
                2.0 * v.powf(2.0 * h) * (s + v * v).powf(h - 1.5)
            })
            .sum::<f64>()
            * dv
    }

    #[test]
    fn kernel_matches_direct_definition() {
        for &h in &[0.05, 0.1, 0.3] {
            let k = VolterraKernel::new(hp(h));
            for &(t, s) in &[(1.0f64, 0.5f64), (1.0, 0.01), (2.0, 1.9), (0.3, 0.1)] {
                let c = c_h(hp(h));
                let direct = c
                    * ((t / s).powf(h - 0.5) * (t - s).powf(h - 0.5)
                        + (0.5 - h) * s.powf(0.5 - h) * inner_by_midpoint(h, t, s));
                let got = k.eval(t, s, t - s);
                assert!(((got - direct) / direct).abs() < 1e-6, "h={h} t={t} s={s}: {got} vs {direct}");
            }
        }
    }

    #[test]
    fn kernel_square_integrates_to_variance() {
        for &h in &[0.05, 0.1, 0.25, 0.4] {
            let k = VolterraKernel::new(hp(h));
            let t = 1.0;
            // split at 1/2 to isolate the two endpoint singularities
            let left = integrate_power(2.0 * h - 1.0, 0.0, 0.5, |s| {
                let v = k.eval(t, s, t - s);
                (v * s.powf(0.5 - h)).powi(2)
            }, 64);
            let right = integrate_power(2.0 * h - 1.0, 0.0, 0.5, |g| {
                let s = t - g;
                let v = k.eval(t, s, g);
                (v * g.powf(0.5 - h)).powi(2)
            }, 64);
            let total = left + right;
            assert!((total - 1.0).abs() < 2e-4, "h={h}: {total}");
            // cross-check with a plain rule away from the endpoints
            let mid = integrate(|s| k.eval(t, s, t - s).powi(2), 0.25, 0.75, 32);
            assert!(mid > 0.0 && mid < total);
        }
    }

    #[test]
    fn kernel_is_homogeneous() {
        let h = 0.1;
        let k = VolterraKernel::new(hp(h));
        let a = k.eval(1.0, 0.3, 0.7);
        let lam: f64 = 3.7;
        let b = k.eval(lam, 0.3 * lam, 0.7 * lam);
        assert!((b / a - lam.powf(h - 0.5)).abs() < 1e-12);
    }
}
