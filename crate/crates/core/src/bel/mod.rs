//! Malliavin weight for the delta of an fBm-driven SDE and the resulting
//! Monte-Carlo estimator.

mod kernel;
mod payoff;
mod weight_fn;

pub use kernel::BelKernel;
pub use payoff::Payoff;
pub use weight_fn::WeightFn;

use crate::error::{Error, Result};
use crate::fbm::{GridSpec, JointPath, PathSeed, VolterraWeights};
use crate::frac::HurstParam;
use crate::report::config_digest;
use crate::sde::{euler_solve, flow_derivative, FlowPath, MollifiedDrift};
use crate::stats::{map_paths, Estimate};

/// Per-path weight vector `π`.
#[derive(Debug, Clone, PartialEq)]
pub struct MalliavinWeight {
    pub pi: Vec<f64>,
}

/// Cell coefficients `G_k` (flat `n * d * d`) of the weight for one flow.
pub fn weight_profile(h: HurstParam, a: &WeightFn, flow: &FlowPath, grid: GridSpec) -> Result<Vec<f64>> {
    BelKernel::new(grid, h).profile(&a.cell_averages(grid)?, flow)
}

/// `π = C Σ_k G_kᵀ dW_k`, the constant included.
pub fn malliavin_weight(h: HurstParam, a: &WeightFn, flow: &FlowPath, path: &JointPath) -> Result<MalliavinWeight> {
    let grid = path.grid();
    if flow.dim() != path.dim() {
        return Err(Error::Dimension { expected: path.dim(), got: flow.dim() });
    }
    let k = BelKernel::new(grid, h);
    let prof = k.profile(&a.cell_averages(grid)?, flow)?;
    Ok(MalliavinWeight { pi: k.weight_from_profile(&prof, path)? })
}

/// Monte-Carlo delta with per-component standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: usize,
    pub config_digest: String,
}

impl DeltaEstimate {
    /// `samples[c][p]` is the contribution of path `p` to component `c`.
    pub fn from_samples(samples: &[Vec<f64>], config_digest: String) -> Result<Self> {
        let est: Vec<Estimate> = samples.iter().map(|s| Estimate::from_samples(s)).collect::<Result<_>>()?;
        Ok(Self {
            mean: est.iter().map(|e| e.mean).collect(),
            stderr: est.iter().map(|e| e.stderr).collect(),
            n_paths: samples.first().map_or(0, Vec::len),
            config_digest,
        })
    }
}

/// Terminal state and weight of one simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub terminal: Vec<f64>,
    pub pi: Vec<f64>,
}

/// Everything shared by the paths of one delta estimate.
#[derive(Debug, Clone)]
pub struct BelProblem {
    drift: MollifiedDrift,
    x0: Vec<f64>,
    weight_fn: WeightFn,
    sampler: VolterraWeights,
    kernel: BelKernel,
    a_cells: Vec<f64>,
}

impl BelProblem {
    pub fn new(drift: MollifiedDrift, x0: Vec<f64>, h: HurstParam, a: WeightFn, grid: GridSpec) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::Config("initial point must have at least one component".into()));
        }
        drift.check_dim(x0.len())?;
        let a_cells = a.cell_averages(grid)?;
        Ok(Self {
            drift,
            x0,
            weight_fn: a,
            sampler: VolterraWeights::new(grid, h),
            kernel: BelKernel::new(grid, h),
            a_cells,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.sampler.grid()
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn sampler(&self) -> &VolterraWeights {
        &self.sampler
    }

    pub fn drift(&self) -> &MollifiedDrift {
        &self.drift
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn path(&self, seed: PathSeed) -> Result<PathOutcome> {
        let jp = self.sampler.sample(self.dim(), seed)?;
        self.outcome(&jp)
    }

    /// Outcome for a given driving path.
    pub fn outcome(&self, jp: &JointPath) -> Result<PathOutcome> {
        let state = euler_solve(&self.drift, &self.x0, jp)?;
        let flow = flow_derivative(&self.drift, &state)?;
        let prof = self.kernel.profile(&self.a_cells, &flow)?;
        let pi = self.kernel.weight_from_profile(&prof, jp)?;
        Ok(PathOutcome { terminal: state.terminal().to_vec(), pi })
    }

    pub fn simulate(&self, n_paths: usize, master_seed: u64) -> Result<Vec<PathOutcome>> {
        map_paths(n_paths, |i| self.path(PathSeed::new(master_seed, i)))
    }

    pub fn digest(&self, payoff: &Payoff, n_paths: usize, master_seed: u64) -> String {
        let g = self.grid();
        config_digest(&format!(
            "bel;T={};n={};h={};seed={};paths={};drift={};eps={};payoff={};weight={};x0={:?}",
            g.horizon(),
            g.n_steps(),
            self.sampler.hurst().value(),
            master_seed,
            n_paths,
            self.drift.base().describe(),
            self.drift.epsilon(),
            payoff,
            self.weight_fn.describe(),
            self.x0
        ))
    }
}

/// `samples[c][p] = Φ(X_T^p) π_c^p`.
pub fn delta_samples(outcomes: &[PathOutcome], payoff: &Payoff) -> Result<Vec<Vec<f64>>> {
    let d = outcomes.first().map_or(0, |o| o.pi.len());
    let mut out = vec![Vec::with_capacity(outcomes.len()); d];
    for (p, o) in outcomes.iter().enumerate() {
        let v = payoff.eval(&o.terminal);
        if !v.is_finite() {
            return Err(Error::NonFinite { context: "payoff", step: p });
        }
        for (c, s) in out.iter_mut().enumerate() {
            s.push(v * o.pi[c]);
        }
    }
    Ok(out)
}

/// Delta of `E[Φ(X_T)]` with respect to the initial point.
#[allow(clippy::too_many_arguments)]
pub fn estimate_delta(
    drift: &MollifiedDrift,
    x0: &[f64],
    payoff: Payoff,
    h: HurstParam,
    a: &WeightFn,
    grid: GridSpec,
    n_paths: usize,
    master_seed: u64,
) -> Result<DeltaEstimate> {
    if n_paths < 2 {
        return Err(Error::Config(format!("need at least 2 paths, got {n_paths}")));
    }
    let problem = BelProblem::new(drift.clone(), x0.to_vec(), h, a.clone(), grid)?;
    let outcomes = problem.simulate(n_paths, master_seed)?;
    let samples = delta_samples(&outcomes, &payoff)?;
    DeltaEstimate::from_samples(&samples, problem.digest(&payoff, n_paths, master_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{mollify, DriftSpec};

    fn zero_problem(n: usize) -> BelProblem {
        let grid = GridSpec::new(1.0, n).unwrap();
        BelProblem::new(
            mollify(DriftSpec::Zero, 0.1).unwrap(),
            vec![0.0],
            HurstParam::new(0.1).unwrap(),
            WeightFn::uniform(1.0).unwrap(),
            grid,
        )
        .unwrap()
    }

    #[test]
    fn weight_does_not_depend_on_payoff_and_estimator_is_linear() {
        let p = zero_problem(32);
        let out = p.simulate(64, 5).unwrap();
        let a = delta_samples(&out, &Payoff::Call { strike: 0.1 }).unwrap();
        let b = delta_samples(&out, &Payoff::Put { strike: 0.1 }).unwrap();
        let c = delta_samples(&out, &Payoff::Identity).unwrap();
        // call - put = identity - strike, pathwise
        for i in 0..64 {
            let lhs = a[0][i] - b[0][i];
            let rhs = c[0][i] - 0.1 * out[i].pi[0];
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn free_functions_agree_with_problem() {
        let p = zero_problem(16);
        let seed = PathSeed::new(3, 2);
        let jp = p.sampler().sample(1, seed).unwrap();
        let w = malliavin_weight(
            HurstParam::new(0.1).unwrap(),
            &WeightFn::uniform(1.0).unwrap(),
            &FlowPath::constant(16, 1, 1.0),
            &jp,
        )
        .unwrap();
        assert_eq!(w.pi, p.path(seed).unwrap().pi);
    }

    #[test]
    fn too_few_paths_is_an_error() {
        let grid = GridSpec::new(1.0, 8).unwrap();
        let r = estimate_delta(
            &mollify(DriftSpec::Zero, 0.1).unwrap(),
            &[0.0],
            Payoff::Identity,
            HurstParam::new(0.1).unwrap(),
            &WeightFn::uniform(1.0).unwrap(),
            grid,
            1,
            0,
        );
        assert!(r.is_err());
    }
}
