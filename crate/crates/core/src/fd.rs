//! Central finite differences with common random numbers, and the Gaussian
//! closed form for the digital delta.

use crate::bel::Payoff;
use crate::error::{Error, Result};
use crate::fbm::{PathSeed, VolterraWeights};
use crate::frac::HurstParam;
use crate::sde::{euler_solve, MollifiedDrift};
use crate::special::normal_pdf;
use crate::stats::{map_paths, Estimate};

/// Fewer informative path pairs than this and the estimate is flagged.
const MIN_INFORMATIVE_PAIRS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct FdEstimate {
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
    pub bump: f64,
    pub n_paths: usize,
    /// Per coordinate: too few paths saw the payoff change between the bumps.
    pub below_noise_floor: Vec<bool>,
    /// `samples[i][p]`: paired difference quotient of path `p`, coordinate `i`.
    pub samples: Vec<Vec<f64>>,
}

/// `value_i = mean_p [Φ(x + δ e_i, p) - Φ(x - δ e_i, p)] / 2δ` with the same
/// seed on both sides of each pair.
pub fn fd_delta<F>(runner: F, x: &[f64], bump: f64, n_paths: usize, master_seed: u64) -> Result<FdEstimate>
where
    F: Fn(&[f64], PathSeed) -> Result<f64> + Sync + Send,
{
    if !(bump > 0.0 && bump.is_finite()) {
        return Err(Error::Config(format!("bump must be positive, got {bump}")));
    }
    if n_paths < 2 {
        return Err(Error::Config(format!("need at least 2 paths, got {n_paths}")));
    }
    let d = x.len();
    let pairs: Vec<Vec<(f64, f64)>> = map_paths(n_paths, |p| {
        let seed = PathSeed::new(master_seed, p);
        (0..d)
            .map(|i| {
                let mut up = x.to_vec();
                let mut dn = x.to_vec();
                up[i] += bump;
                dn[i] -= bump;
                Ok((runner(&up, seed)?, runner(&dn, seed)?))
            })
            .collect()
    })?;
    let mut value = Vec::with_capacity(d);
    let mut stderr = Vec::with_capacity(d);
    let mut floor = Vec::with_capacity(d);
    let mut samples = Vec::with_capacity(d);
    for i in 0..d {
        let diffs: Vec<f64> = pairs.iter().map(|p| (p[i].0 - p[i].1) / (2.0 * bump)).collect();
        let scale = pairs.iter().map(|p| p[i].0.abs().max(p[i].1.abs())).fold(0.0, f64::max);
        let informative = pairs
            .iter()
            .filter(|p| (p[i].0 - p[i].1).abs() > 1e-12 * scale.max(1e-300))
            .count();
        let e = Estimate::from_samples(&diffs)?;
        value.push(e.mean);
        stderr.push(e.stderr);
        floor.push(informative < MIN_INFORMATIVE_PAIRS.min(n_paths));
        samples.push(diffs);
    }
    Ok(FdEstimate { value, stderr, bump, n_paths, below_noise_floor: floor, samples })
}

/// Default bump: `1e-2 max(1, |x|)` for smooth payoffs, `5e-2` for digitals.
pub fn default_bump(x: f64, payoff: &Payoff) -> f64 {
    if payoff.is_smooth() {
        1e-2 * x.abs().max(1.0)
    } else {
        5e-2
    }
}

/// Delta of `P(x + B^H_T > K)`: `φ((K - x)/T^h) / T^h`.
pub fn gaussian_digital_delta(x: f64, strike: f64, horizon: f64, h: HurstParam) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let sd = horizon.powf(h.value());
    Ok(normal_pdf((strike - x) / sd) / sd)
}

/// Payoff of the Euler solution started at `x`, driven by the path of `seed`.
#[derive(Debug, Clone)]
pub struct SdeRunner {
    pub drift: MollifiedDrift,
    pub sampler: VolterraWeights,
    pub payoff: Payoff,
}

impl SdeRunner {
    pub fn run(&self, x: &[f64], seed: PathSeed) -> Result<f64> {
        let jp = self.sampler.sample(x.len(), seed)?;
        let s = euler_solve(&self.drift, x, &jp)?;
        Ok(self.payoff.eval(s.terminal()))
    }
}
