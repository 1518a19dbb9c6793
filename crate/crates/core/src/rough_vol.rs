//! Two-factor stock model with a rough volatility factor, and its delta
//! vector in both initial values.
//!
//! ```text
//! dS = μ S dt + g(σ) S dW′,    dσ = b(σ) dt + dB^H,    S_0 = x1, σ_0 = x2,
//! ```
//!
//! with `W′` independent of `B^H`. The delta with respect to `x1` only needs an
//! Itô weight in `W′`; the delta with respect to `x2` adds the fractional
//! weight of the volatility flow.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bel::{BelKernel, DeltaEstimate, WeightFn};
use crate::error::{Error, Result};
use crate::fbm::{GridSpec, JointPath, PathSeed, Stream, VolterraWeights};
use crate::frac::HurstParam;
use crate::report::config_digest;
use crate::sde::{euler_solve, flow_derivative, MollifiedDrift};
use crate::stats::map_paths;

/// Advisory limit on `h` for the strong-solution regime of this model.
pub const RV_STRONG_THRESHOLD: f64 = 1.0 / 6.0;
/// Advisory limit on `h` below which the delta has a continuous version.
pub const RV_CONTINUOUS_THRESHOLD: f64 = 1.0 / 8.0;

/// Shifted sigmoid `g(z) = α + γ / (1 + e^{-z})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolMap {
    alpha: f64,
    gamma: f64,
}

impl VolMap {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("vol floor must be positive, got {alpha}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("vol range must be non-negative, got {gamma}")));
        }
        Ok(Self { alpha, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn logistic(z: f64) -> f64 {
        if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        self.alpha + self.gamma * Self::logistic(z)
    }

    pub fn deriv(&self, z: f64) -> f64 {
        let l = Self::logistic(z);
        self.gamma * l * (1.0 - l)
    }
}

/// Model parameters.
#[derive(Debug, Clone)]
pub struct RvConfig {
    pub mu: f64,
    pub g: VolMap,
    pub vol_drift: MollifiedDrift,
    pub x1: f64,
    pub x2: f64,
    pub h: HurstParam,
}

impl RvConfig {
    pub fn new(mu: f64, g: VolMap, vol_drift: MollifiedDrift, x1: f64, x2: f64, h: HurstParam) -> Result<Self> {
        let cfg = Self { mu, g, vol_drift, x1, x2, h };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.x1 > 0.0 && self.x1.is_finite()) {
            return Err(Error::Config(format!("initial stock price must be positive, got {}", self.x1)));
        }
        if !self.x2.is_finite() || !self.mu.is_finite() {
            return Err(Error::Config("vol state and drift rate must be finite".into()));
        }
        self.vol_drift.check_dim(1)
    }

    fn describe(&self) -> String {
        format!(
            "mu={};alpha={};gamma={};drift={};eps={};x1={};x2={};h={}",
            self.mu,
            self.g.alpha,
            self.g.gamma,
            self.vol_drift.base().describe(),
            self.vol_drift.epsilon(),
            self.x1,
            self.x2,
            self.h.value()
        )
    }
}

/// One simulated path with its variation processes.
#[derive(Clone, PartialEq)]
pub struct RvPath {
    pub s: Vec<f64>,
    pub sigma: Vec<f64>,
    pub ds_dx1: Vec<f64>,
    pub ds_dx2: Vec<f64>,
    pub dsigma_dx2: Vec<f64>,
    /// Increments of the stock's Brownian motion.
    pub dw_stock: Vec<f64>,
    /// Driving path of the volatility factor.
    pub fbm: JointPath,
}

impl fmt::Debug for RvPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RvPath")
            .field("steps", &self.dw_stock.len())
            .field("s_terminal", &self.s.last())
            .field("sigma_terminal", &self.sigma.last())
            .finish()
    }
}

/// Precomputed sampler and weight tables for one `(config, grid)`.
#[derive(Debug, Clone)]
pub struct RvModel {
    cfg: RvConfig,
    sampler: VolterraWeights,
    kernel: BelKernel,
}

impl RvModel {
    pub fn new(cfg: RvConfig, grid: GridSpec) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            sampler: VolterraWeights::new(grid, cfg.h),
            kernel: BelKernel::new(grid, cfg.h),
            cfg,
        })
    }

    pub fn config(&self) -> &RvConfig {
        &self.cfg
    }

    pub fn grid(&self) -> GridSpec {
        self.sampler.grid()
    }

    /// Same model restarted from `(x1, x2)`; tables are shared.
    pub fn with_initial(&self, x1: f64, x2: f64) -> Result<Self> {
        let mut m = self.clone();
        m.cfg.x1 = x1;
        m.cfg.x2 = x2;
        m.cfg.validate()?;
        Ok(m)
    }

    pub fn simulate(&self, seed: PathSeed) -> Result<RvPath> {
        self.simulate_with_streams(seed, seed)
    }

    /// Stock noise from `stock_seed`, fBm path from `fbm_seed`.
    pub fn simulate_with_streams(&self, stock_seed: PathSeed, fbm_seed: PathSeed) -> Result<RvPath> {
        let grid = self.grid();
        let n = grid.n_steps();
        let dt = grid.dt();
        let fbm = self.sampler.sample(1, fbm_seed)?;
        let (sigma, dsigma_dx2) = {
            let state = euler_solve(&self.cfg.vol_drift, &[self.cfg.x2], &fbm)?;
            let flow = flow_derivative(&self.cfg.vol_drift, &state)?;
            let sigma: Vec<f64> = (0..=n).map(|k| state.x(k, 0)).collect();
            let ds: Vec<f64> = (0..=n).map(|k| flow.entry(k, 0, 0)).collect();
            (sigma, ds)
        };
        let mut rng = stock_seed.rng(Stream::StockNoise);
        let sq = dt.sqrt();
        let dw_stock: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * sq).collect();

        let (cfg, g) = (&self.cfg, &self.cfg.g);
        let mut s = Vec::with_capacity(n + 1);
        let mut ds_dx1 = Vec::with_capacity(n + 1);
        let mut ds_dx2 = Vec::with_capacity(n + 1);
        let mut log_s = cfg.x1.ln();
        // derivative of log S in x2
        let mut dlog = 0.0f64;
        for k in 0..=n {
            let sk = log_s.exp();
            if !(sk > 0.0 && sk.is_finite()) || !dlog.is_finite() {
                return Err(Error::NonFinite { context: "stock path", step: k });
            }
            s.push(sk);
            ds_dx1.push(sk / cfg.x1);
            ds_dx2.push(sk * dlog);
            if k == n {
                break;
            }
            let (gk, gpk) = (g.value(sigma[k]), g.deriv(sigma[k]));
            log_s += (cfg.mu - 0.5 * gk * gk) * dt + gk * dw_stock[k];
            dlog += gpk * dsigma_dx2[k] * (dw_stock[k] - gk * dt);
        }
        Ok(RvPath { s, sigma, ds_dx1, ds_dx2, dsigma_dx2, dw_stock, fbm })
    }

    /// Per-path `(w1, w2a + w2b)` for cell averages `a_cells` of the time weighting.
    pub fn weights(&self, path: &RvPath, a_cells: &[f64]) -> Result<[f64; 2]> {
        let n = self.grid().n_steps();
        if a_cells.len() != n {
            return Err(Error::Dimension { expected: n, got: a_cells.len() });
        }
        let (mut w1, mut w2a) = (0.0, 0.0);
        for k in 0..n {
            let denom = path.s[k] * self.cfg.g.value(path.sigma[k]);
            if !(denom > 0.0 && denom.is_finite()) {
                return Err(Error::NonFinite { context: "stock weight denominator", step: k });
            }
            let c = a_cells[k] * path.dw_stock[k] / denom;
            w1 += c * path.ds_dx1[k];
            w2a += c * path.ds_dx2[k];
        }
        let flow = crate::sde::FlowPath::from_scalar(path.dsigma_dx2.clone());
        let prof = self.kernel.profile(a_cells, &flow)?;
        let w2b = self.kernel.weight_from_profile(&prof, &path.fbm)?[0];
        Ok([w1, w2a + w2b])
    }

    /// `samples[c][p] = Φ(S_T, σ_T) w_c` for paths `0..n_paths`.
    pub fn delta_samples<P>(&self, payoff: &P, a: &WeightFn, n_paths: usize, master_seed: u64) -> Result<Vec<Vec<f64>>>
    where
        P: Fn(f64, f64) -> f64 + Sync,
    {
        let a_cells = a.cell_averages(self.grid())?;
        let per_path = map_paths(n_paths, |i| {
            let p = self.simulate(PathSeed::new(master_seed, i))?;
            let v = payoff(*p.s.last().expect("non-empty path"), *p.sigma.last().expect("non-empty path"));
            if !v.is_finite() {
                return Err(Error::NonFinite { context: "payoff", step: i as usize });
            }
            let w = self.weights(&p, &a_cells)?;
            Ok([v * w[0], v * w[1]])
        })?;
        Ok((0..2).map(|c| per_path.iter().map(|w| w[c]).collect()).collect())
    }

    /// Payoff value started from `x = (x1, x2)`, for finite differences.
    pub fn payoff_at<P>(&self, payoff: &P, x: &[f64], seed: PathSeed) -> Result<f64>
    where
        P: Fn(f64, f64) -> f64,
    {
        if x.len() != 2 {
            return Err(Error::Dimension { expected: 2, got: x.len() });
        }
        let p = self.with_initial(x[0], x[1])?.simulate(seed)?;
        Ok(payoff(*p.s.last().expect("non-empty path"), *p.sigma.last().expect("non-empty path")))
    }

    pub fn digest(&self, payoff_tag: &str, a: &WeightFn, n_paths: usize, master_seed: u64) -> String {
        let g = self.grid();
        config_digest(&format!(
            "rv;T={};n={};{};payoff={payoff_tag};weight={};seed={master_seed};paths={n_paths}",
            g.horizon(),
            g.n_steps(),
            self.cfg.describe(),
            a.describe()
        ))
    }
}

/// One path of the model.
pub fn simulate_rv(cfg: &RvConfig, grid: GridSpec, seed: PathSeed) -> Result<RvPath> {
    RvModel::new(cfg.clone(), grid)?.simulate(seed)
}

/// One path with separately seeded stock noise and fBm.
pub fn simulate_rv_with_streams(cfg: &RvConfig, grid: GridSpec, stock_seed: PathSeed, fbm_seed: PathSeed) -> Result<RvPath> {
    RvModel::new(cfg.clone(), grid)?.simulate_with_streams(stock_seed, fbm_seed)
}

/// Delta of `E[Φ(S_T, σ_T)]` with respect to `(x1, x2)`.
pub fn sbel_delta<P>(
    cfg: &RvConfig,
    payoff: &P,
    a: &WeightFn,
    grid: GridSpec,
    n_paths: usize,
    master_seed: u64,
) -> Result<DeltaEstimate>
where
    P: Fn(f64, f64) -> f64 + Sync,
{
    if n_paths < 2 {
        return Err(Error::Config(format!("need at least 2 paths, got {n_paths}")));
    }
    let model = RvModel::new(cfg.clone(), grid)?;
    let samples = model.delta_samples(payoff, a, n_paths, master_seed)?;
    DeltaEstimate::from_samples(&samples, model.digest("closure", a, n_paths, master_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{mollify, DriftSpec};
    use crate::stats::Estimate;

    fn cfg(mu: f64, gamma: f64) -> RvConfig {
        RvConfig::new(
            mu,
            VolMap::new(0.2, gamma).unwrap(),
            mollify(DriftSpec::RegimeSwitch { b1: 0.5, b2: -0.5, threshold: 0.0 }, 0.05).unwrap(),
            1.3,
            0.1,
            HurstParam::new(0.1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn vol_map_range_and_derivative() {
        let g = VolMap::new(0.2, 0.3).unwrap();
        for &z in &[-800.0, -3.0, 0.0, 2.0, 800.0] {
            let v = g.value(z);
            assert!(v >= 0.2 && v <= 0.5);
            let fd = (g.value(z + 1e-6) - g.value(z - 1e-6)) / 2e-6;
            assert!((fd - g.deriv(z)).abs() < 1e-8);
        }
        assert!(VolMap::new(0.0, 1.0).is_err());
        assert!(VolMap::new(0.1, -1.0).is_err());
    }

    #[test]
    fn path_invariants() {
        let grid = GridSpec::new(1.0, 64).unwrap();
        let p = simulate_rv(&cfg(0.05, 0.3), grid, PathSeed::new(4, 9)).unwrap();
        assert_eq!(p.s[0], 1.3);
        assert_eq!(p.sigma[0], 0.1);
        assert_eq!(p.ds_dx1[0], 1.0);
        assert_eq!(p.ds_dx2[0], 0.0);
        assert_eq!(p.dsigma_dx2[0], 1.0);
        for k in 0..=64 {
            assert!(p.s[k] > 0.0);
            assert!((p.ds_dx1[k] * 1.3 - p.s[k]).abs() <= 1e-15 * p.s[k]);
        }
        let flat = simulate_rv(&cfg(0.05, 0.0), grid, PathSeed::new(4, 9)).unwrap();
        assert!(flat.ds_dx2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stock_stream_does_not_move_vol() {
        let grid = GridSpec::new(1.0, 32).unwrap();
        let c = cfg(0.0, 0.3);
        let a = simulate_rv_with_streams(&c, grid, PathSeed::new(1, 0), PathSeed::new(7, 0)).unwrap();
        let b = simulate_rv_with_streams(&c, grid, PathSeed::new(2, 0), PathSeed::new(7, 0)).unwrap();
        assert_eq!(a.sigma, b.sigma);
        assert_ne!(a.s, b.s);
    }

    #[test]
    fn x2_variation_matches_bumped_paths() {
        let grid = GridSpec::new(1.0, 64).unwrap();
        let m = RvModel::new(cfg(0.05, 0.4), grid).unwrap();
        let seed = PathSeed::new(11, 3);
        let base = m.simulate(seed).unwrap();
        let d = 1e-6;
        let up = m.with_initial(1.3, 0.1 + d).unwrap().simulate(seed).unwrap();
        let dn = m.with_initial(1.3, 0.1 - d).unwrap().simulate(seed).unwrap();
        for k in [1, 20, 64] {
            let fd = (up.s[k] - dn.s[k]) / (2.0 * d);
            assert!((fd - base.ds_dx2[k]).abs() < 1e-6 * (1.0 + fd.abs()), "k={k}: {fd} vs {}", base.ds_dx2[k]);
        }
    }

    #[test]
    fn constant_vol_mean_is_preserved() {
        let grid = GridSpec::new(1.0, 16).unwrap();
        let m = RvModel::new(cfg(0.0, 0.0), grid).unwrap();
        let ends: Vec<f64> = map_paths(4000, |i| Ok(*m.simulate(PathSeed::new(2, i))?.s.last().unwrap())).unwrap();
        let e = Estimate::from_samples(&ends).unwrap();
        assert!(e.z_score(1.3).abs() < 3.0, "{e:?}");
    }
}
