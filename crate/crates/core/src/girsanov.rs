//! Change-of-measure density that removes a drift from `x0 + B^H`.
//!
//! With `u_r = -b(t_r, x0 + B^H_r)` and `q` the inverse of the Volterra
//! operator with kernel `K` applied to `∫_0^· u`, the density is
//! `ξ = exp(-Σ q_k dW_k - ½ Σ q_k² Δ)` with `q_k` taken at the left end of each
//! step. Under `ξ dP` the process `x0 + B^H` solves `dX = b dt + dB̃^H`.
//! Because `q_k` is adapted, `E[ξ] = 1` holds exactly for the discrete sum.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fbm::{GridSpec, JointPath};
use crate::frac::{kh_inverse_scale, HurstParam, UniformKhInverse};
use crate::sde::DriftField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GirsanovWeight {
    pub xi: f64,
    pub log_xi: f64,
}

fn unit_inverse(h: HurstParam, n: usize) -> Arc<UniformKhInverse> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<UniformKhInverse>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (h.value().to_bits(), n);
    if let Some(t) = cache.lock().expect("inverse cache poisoned").get(&key) {
        return Arc::clone(t);
    }
    let built = Arc::new(UniformKhInverse::new(h, n, 1.0));
    let mut guard = cache.lock().expect("inverse cache poisoned");
    Arc::clone(guard.entry(key).or_insert(built))
}

/// Density evaluator for one `(grid, h)`.
#[derive(Debug, Clone)]
pub struct Girsanov {
    grid: GridSpec,
    inverse: Arc<UniformKhInverse>,
    scale: f64,
}

impl Girsanov {
    pub fn new(grid: GridSpec, h: HurstParam) -> Self {
        Self {
            grid,
            inverse: unit_inverse(h, grid.n_steps()),
            scale: grid.dt().powf(0.5 - h.value()) * kh_inverse_scale(h),
        }
    }

    /// Density for a bounded one-dimensional drift along `x0 + bh`.
    pub fn weight<F: DriftField + ?Sized>(&self, drift: &F, path: &JointPath, x0: f64) -> Result<GirsanovWeight> {
        if path.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: path.dim() });
        }
        if path.grid() != self.grid {
            return Err(Error::Grid("path grid differs from the density grid".into()));
        }
        if !drift.bound().is_finite() {
            return Err(Error::Config("density needs a bounded drift".into()));
        }
        let n = self.grid.n_steps();
        let dt = self.grid.dt();
        let mut u = vec![0.0; n + 1];
        let mut b = [0.0];
        for (k, uk) in u.iter_mut().enumerate() {
            drift.value(self.grid.time(k), &[x0 + path.bh(k, 0)], &mut b);
            *uk = -b[0];
        }
        let mut log_xi = 0.0;
        for k in 1..n {
            let q = self.inverse.at(&u, k) * self.scale;
            if !q.is_finite() {
                return Err(Error::NonFinite { context: "girsanov integrand", step: k });
            }
            log_xi -= q * path.dw(k, 0) + 0.5 * q * q * dt;
        }
        Ok(GirsanovWeight { xi: log_xi.exp(), log_xi })
    }
}

/// One-shot form of [`Girsanov::weight`].
pub fn girsanov_xi<F: DriftField + ?Sized>(h: HurstParam, drift: &F, path: &JointPath, x0: f64) -> Result<GirsanovWeight> {
    Girsanov::new(path.grid(), h).weight(drift, path, x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{PathSeed, VolterraWeights};
    use crate::sde::{mollify, DriftSpec};

    #[test]
    fn zero_drift_gives_unit_density() {
        let g = GridSpec::new(1.0, 32).unwrap();
        let h = HurstParam::new(0.1).unwrap();
        let p = VolterraWeights::new(g, h).sample(1, PathSeed::new(1, 1)).unwrap();
        let w = girsanov_xi(h, &mollify(DriftSpec::Zero, 0.1).unwrap(), &p, 0.0).unwrap();
        assert_eq!(w.xi, 1.0);
        assert_eq!(w.log_xi, 0.0);
    }

    #[test]
    fn unbounded_or_multidimensional_input_is_rejected() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let h = HurstParam::new(0.1).unwrap();
        let lin = mollify(DriftSpec::Linear { lambda: 1.0 }, 0.1).unwrap();
        assert!(girsanov_xi(h, &lin, &JointPath::zero(g, 1), 0.0).is_err());
        let sw = mollify(DriftSpec::RegimeSwitch { b1: 1.0, b2: -1.0, threshold: 0.0 }, 0.1).unwrap();
        assert!(girsanov_xi(h, &sw, &JointPath::zero(g, 2), 0.0).is_err());
    }

    #[test]
    fn constant_drift_matches_closed_form_integrand() {
        // b ≡ c: q(s) = -c κ Γ(3/2-h)/Γ(2-2h) s^{1/2-h}
        let g = GridSpec::new(1.0, 16).unwrap();
        let h = HurstParam::new(0.2).unwrap();
        let c = 0.7;
        let drift = mollify(DriftSpec::RegimeSwitch { b1: c, b2: c, threshold: 0.0 }, 0.1).unwrap();
        let gs = Girsanov::new(g, h);
        let w = gs.weight(&drift, &JointPath::zero(g, 1), 0.0).unwrap();
        let k = crate::frac::kh_inverse_constant(h) * kh_inverse_scale(h);
        let expect: f64 = (1..16).map(|i| -0.5 * (c * k * g.time(i).powf(0.3)).powi(2) * g.dt()).sum();
        assert!((w.log_xi - expect).abs() < 1e-12, "{} vs {expect}", w.log_xi);
    }
}
