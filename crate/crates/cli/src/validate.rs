//! Desk-scale property suite behind `--mode validate`.

use fracdelta::bel::{estimate_delta, Payoff, WeightFn};
use fracdelta::fbm::{covariance_report, GridSpec, PathSeed, VolterraWeights};
use fracdelta::fd::gaussian_digital_delta;
use fracdelta::frac::{
    cov_rh, frac_deriv_left, frac_int_left, kernel_covariance, shuffle_check, FracOrder, HurstParam, SampledFunction,
};
use fracdelta::girsanov::Girsanov;
use fracdelta::report::ResultRow;
use fracdelta::sde::{euler_solve, flow_derivative, mollify, DriftSpec};
use fracdelta::special::gamma;
use fracdelta::stats::{map_paths, Estimate};

use crate::config::RunConfig;
use crate::error::{CliResult, Context};

/// Monte-Carlo checks pass within this many standard errors.
const SE_TOLERANCE: f64 = 4.0;
/// Covariance grid size, kept small so the sample covariance is well resolved.
const COV_STEPS: usize = 16;
const OPERATOR_POINTS: usize = 1024;

pub fn run(cfg: &RunConfig) -> CliResult<Vec<ResultRow>> {
    let h = cfg.hurst;
    let grid = GridSpec::new(cfg.horizon, cfg.steps).context("grid")?;
    let mut rows = covariance(h, cfg)?;
    rows.extend(kernel_identity(h)?);
    rows.extend(operators()?);
    rows.push(shuffle()?);
    rows.extend(flow(h, grid, cfg.seed)?);
    rows.push(girsanov(h, grid, cfg)?);
    rows.extend(gaussian_deltas(h, grid, cfg)?);
    Ok(rows)
}

fn covariance(h: HurstParam, cfg: &RunConfig) -> CliResult<Vec<ResultRow>> {
    let grid = GridSpec::new(cfg.horizon, COV_STEPS).context("grid")?;
    let w = VolterraWeights::new(grid, h);
    let paths = map_paths(cfg.paths, |i| Ok(w.sample(1, PathSeed::new(cfg.seed, i))?.bh_component(0)[1..].to_vec()))
        .context("fbm_engine")?;
    let rep = covariance_report(&paths, &grid.times()[1..], h).context("fbm_engine")?;
    Ok(vec![ResultRow::new("covariance_max_deviation_se", 0, rep.max_deviation_se, 0.0, cfg.paths).check(0.0, 5.0)])
}

fn kernel_identity(h: HurstParam) -> CliResult<Vec<ResultRow>> {
    [(1.0, 1.0), (1.0, 0.5), (0.7, 0.3)]
        .iter()
        .enumerate()
        .map(|(i, &(t, s))| {
            let q = kernel_covariance(h, t, s).context("frac_core")?;
            let c = cov_rh(h, t, s).context("frac_core")?;
            Ok(ResultRow::new("kernel_covariance_ratio", i, q / c, 0.0, 0).check(1.0, 1e-3))
        })
        .collect()
}

fn operators() -> CliResult<Vec<ResultRow>> {
    let n = OPERATOR_POINTS;
    let order = |a| FracOrder::new(a).context("frac_core");
    let (a, b) = (order(0.25)?, order(0.4)?);
    let one = SampledFunction::from_fn(1.0, n, |_| 1.0).context("frac_core")?;
    let f = SampledFunction::from_fn(1.0, n, f64::sin).context("frac_core")?;
    let max_abs = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);

    let exact: Vec<f64> = one.grid().iter().map(|t| t.powf(0.25) / gamma(1.25)).collect();
    let e_const = max_abs(frac_int_left(a, &one, 0.0).context("frac_core")?.values(), &exact);
    let lhs = frac_int_left(a, &frac_int_left(b, &f, 0.0).context("frac_core")?, 0.0).context("frac_core")?;
    let rhs = frac_int_left(order(0.65)?, &f, 0.0).context("frac_core")?;
    let e_semi = max_abs(lhs.values(), rhs.values());
    let back = frac_deriv_left(a, &frac_int_left(a, &f, 0.0).context("frac_core")?, 0.0).context("frac_core")?;
    let e_inv = max_abs(&back.values()[1..], &f.values()[1..]);
    Ok(vec![
        ResultRow::new("frac_integral_of_constant_error", 0, e_const, 0.0, 0).check(0.0, 1e-8),
        ResultRow::new("frac_semigroup_error", 0, e_semi, 0.0, 0).check(0.0, 1e-6),
        ResultRow::new("frac_inversion_error", 0, e_inv, 0.0, 0).check(0.0, 1e-4),
    ])
}

fn shuffle() -> CliResult<ResultRow> {
    let a = SampledFunction::from_fn(1.0, 2048, f64::exp).context("frac_core")?;
    let b = SampledFunction::from_fn(1.0, 2048, |s| (3.0 * s).cos()).context("frac_core")?;
    let (lhs, rhs) = shuffle_check(&a, &b, 0.25, 0.75).context("frac_core")?;
    Ok(ResultRow::new("shuffle_error", 0, (lhs - rhs).abs(), 0.0, 0).check(0.0, 1e-8))
}

fn flow(h: HurstParam, grid: GridSpec, seed: u64) -> CliResult<Vec<ResultRow>> {
    let lambda = 0.5;
    let n = grid.n_steps();
    let w = VolterraWeights::new(grid, h);
    let jp = w.sample(1, PathSeed::new(seed, 0)).context("fbm_engine")?;
    let linear = mollify(DriftSpec::Linear { lambda }, 1.0).context("sde_flow")?;
    let j = flow_derivative(&linear, &euler_solve(&linear, &[0.3], &jp).context("sde_flow")?).context("sde_flow")?;
    let discrete = (1.0 + lambda * grid.dt()).powi(n as i32);

    let switch = mollify(DriftSpec::RegimeSwitch { b1: 1.0, b2: -1.0, threshold: 0.0 }, 0.1).context("sde_flow")?;
    let x0 = 0.05;
    let js = flow_derivative(&switch, &euler_solve(&switch, &[x0], &jp).context("sde_flow")?).context("sde_flow")?;
    let d = 1e-6;
    let up = euler_solve(&switch, &[x0 + d], &jp).context("sde_flow")?.terminal()[0];
    let dn = euler_solve(&switch, &[x0 - d], &jp).context("sde_flow")?.terminal()[0];
    let bumped = (up - dn) / (2.0 * d);
    Ok(vec![
        ResultRow::new("linear_flow", 0, j.entry(n, 0, 0), 0.0, 1).check(discrete, 1e-10 * discrete),
        ResultRow::new("flow_vs_bumped_paths", 0, js.entry(n, 0, 0), 0.0, 1).check(bumped, 1e-5 * (1.0 + bumped.abs())),
    ])
}

fn girsanov(h: HurstParam, grid: GridSpec, cfg: &RunConfig) -> CliResult<ResultRow> {
    let drift = DriftSpec::RegimeSwitch { b1: 0.5, b2: -0.5, threshold: 0.0 };
    let s = VolterraWeights::new(grid, h);
    let g = Girsanov::new(grid, h);
    let xi = map_paths(cfg.paths, |i| Ok(g.weight(&drift, &s.sample(1, PathSeed::new(cfg.seed, i))?, 0.0)?.xi))
        .context("girsanov")?;
    let e = Estimate::from_samples(&xi).context("girsanov")?;
    Ok(ResultRow::new("girsanov_mean", 0, e.mean, e.stderr, cfg.paths).check(1.0, SE_TOLERANCE * e.stderr))
}

fn gaussian_deltas(h: HurstParam, grid: GridSpec, cfg: &RunConfig) -> CliResult<Vec<ResultRow>> {
    let drift = mollify(DriftSpec::Zero, 0.1).context("sde_flow")?;
    let a = WeightFn::uniform(cfg.horizon).context("bel_weight")?;
    let strike = 0.5;
    let exact = gaussian_digital_delta(0.0, strike, cfg.horizon, h).context("fd_oracle")?;
    let mut rows = Vec::new();
    for (name, payoff, target) in
        [("identity_delta", Payoff::Identity, 1.0), ("digital_delta", Payoff::Digital { strike }, exact)]
    {
        let e = estimate_delta(&drift, &[0.0], payoff, h, &a, grid, cfg.paths, cfg.seed).context("bel_weight")?;
        rows.push(ResultRow::new(name, 0, e.mean[0], e.stderr[0], e.n_paths).check(target, SE_TOLERANCE * e.stderr[0]));
    }
    Ok(rows)
}
