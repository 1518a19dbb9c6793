//! Mode dispatch and output files.

use std::fs;
use std::path::{Path, PathBuf};

use fracdelta::bel::{delta_samples, BelProblem, DeltaEstimate, Payoff};
use fracdelta::fbm::{write_paths_csv, GridSpec, PathSeed, VolterraWeights};
use fracdelta::fd::{default_bump, fd_delta, SdeRunner};
use fracdelta::frac::{continuous_threshold, strong_threshold, HurstParam};
use fracdelta::report::{render_csv, ResultRow};
use fracdelta::rough_vol::{RvConfig, RvModel, VolMap};
use fracdelta::sde::{default_epsilon, mollify, DriftSpec};
use fracdelta::special::normal_cdf;
use fracdelta::stats::paired_difference;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult, Context};
use crate::validate;

/// Weight and finite difference agree if their paired difference is within
/// this many standard errors.
const AGREEMENT_SE: f64 = 3.0;

/// What a finished run produced.
#[derive(Debug)]
pub struct Outcome {
    pub results: PathBuf,
    pub resolved: PathBuf,
    /// Rows with a failed check (only `validate` treats these as fatal).
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub summary: String,
}

/// Advisories for `h` against the validity thresholds of dimension `d`.
pub fn advisories(h: HurstParam, d: usize) -> Vec<String> {
    let (strong, cont) = (strong_threshold(d), continuous_threshold(d));
    let hv = h.value();
    if hv >= strong {
        vec![format!(
            "advisory: h = {hv} is outside proven validity for d = {d} (strong solutions need h < {strong:.6}); \
             estimates are heuristic"
        )]
    } else if hv >= cont {
        vec![format!(
            "note: h = {hv} has strong solutions for d = {d} but lies at or above {cont:.6}, where the continuous \
             version of the flow is not established"
        )]
    } else {
        Vec::new()
    }
}

pub fn execute(cfg: &RunConfig, threads: Option<usize>) -> CliResult<Outcome> {
    let grid = GridSpec::new(cfg.horizon, cfg.steps).context("grid")?;
    let epsilon = cfg.epsilon.unwrap_or_else(|| default_epsilon(grid, cfg.hurst));
    let bump = cfg.bump.unwrap_or_else(|| default_bump(cfg.x0.iter().fold(0.0, |m, x| m.max(x.abs())), &cfg.payoff));
    let dim = match cfg.mode {
        Mode::Paths | Mode::DeltaSde => cfg.x0.len(),
        Mode::DeltaRv | Mode::Validate => 1,
    };
    let mut notes = advisories(cfg.hurst, dim);

    let (body, rows, summary) = fracdelta::stats::with_threads(threads, || -> CliResult<_> {
        Ok(match cfg.mode {
            Mode::Paths => {
                let (body, n) = paths(cfg, grid)?;
                (body, Vec::new(), format!("wrote {n} paths"))
            }
            Mode::DeltaSde => {
                let (rows, digest, mut extra) = delta_sde(cfg, grid, epsilon, bump)?;
                notes.append(&mut extra);
                (render_csv(&rows), rows, format!("digest {digest}"))
            }
            Mode::DeltaRv => {
                let (rows, digest) = delta_rv(cfg, grid, epsilon)?;
                (render_csv(&rows), rows, format!("digest {digest}"))
            }
            Mode::Validate => {
                let rows = validate::run(cfg)?;
                (render_csv(&rows), rows, String::from("property suite"))
            }
        })
    })
    .context("threads")??;

    let resolved = resolved_path(&cfg.out);
    write(&cfg.out, body.as_bytes())?;
    let mut text = cfg.render(epsilon, bump);
    for n in &notes {
        text.push_str(&format!("# {n}\n"));
    }
    write(&resolved, text.as_bytes())?;
    let failures = rows
        .iter()
        .filter(|r| r.pass == Some(false))
        .map(|r| format!("{}[{}] = {:e}, target {:e}", r.quantity, r.component, r.estimate, r.target.unwrap_or(f64::NAN)))
        .collect();
    Ok(Outcome { results: cfg.out.clone(), resolved, failures, notes, summary })
}

/// Resolved config lives next to the results file.
pub fn resolved_path(out: &Path) -> PathBuf {
    out.with_extension("config")
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn paths(cfg: &RunConfig, grid: GridSpec) -> CliResult<(String, usize)> {
    let w = VolterraWeights::new(grid, cfg.hurst);
    let d = cfg.x0.len();
    let paths = fracdelta::stats::map_paths(cfg.paths, |i| Ok((i, w.sample(d, PathSeed::new(cfg.seed, i))?)))
        .context("fbm_engine")?;
    let mut buf = Vec::new();
    write_paths_csv(&mut buf, &paths).map_err(|source| CliError::Io { path: "paths".into(), source })?;
    Ok((String::from_utf8(buf).expect("CSV is ASCII"), paths.len()))
}

/// Closed-form delta of the zero-drift Gaussian model, when the payoff has one.
fn gaussian_reference(cfg: &RunConfig) -> Option<Vec<f64>> {
    if !matches!(cfg.drift, DriftSpec::Zero) {
        return None;
    }
    let d = cfg.x0.len();
    if let Payoff::Identity = cfg.payoff {
        return Some(vec![1.0 / d as f64; d]);
    }
    if d != 1 {
        return None;
    }
    let sd = cfg.horizon.powf(cfg.hurst.value());
    let z = |k: f64| (cfg.x0[0] - k) / sd;
    let pdf = |k: f64| (-0.5 * z(k) * z(k)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    Some(vec![match cfg.payoff {
        Payoff::Identity => 1.0,
        Payoff::Call { strike } => normal_cdf(z(strike)),
        Payoff::Put { strike } => normal_cdf(z(strike)) - 1.0,
        Payoff::Digital { strike } => pdf(strike),
    }])
}

fn delta_sde(cfg: &RunConfig, grid: GridSpec, epsilon: f64, bump: f64) -> CliResult<(Vec<ResultRow>, String, Vec<String>)> {
    let drift = mollify(cfg.drift.clone(), epsilon).context("sde_flow")?;
    let a = cfg.weight_fn.load(cfg.horizon)?;
    let problem = BelProblem::new(drift.clone(), cfg.x0.clone(), cfg.hurst, a, grid).context("bel_weight")?;
    let outcomes = problem.simulate(cfg.paths, cfg.seed).context("bel_weight")?;
    let samples = delta_samples(&outcomes, &cfg.payoff).context("bel_weight")?;
    let digest = problem.digest(&cfg.payoff, cfg.paths, cfg.seed);
    let bel = DeltaEstimate::from_samples(&samples, digest.clone()).context("bel_weight")?;

    let runner = SdeRunner { drift, sampler: problem.sampler().clone(), payoff: cfg.payoff };
    let fd = fd_delta(|x, s| runner.run(x, s), &cfg.x0, bump, cfg.paths, cfg.seed).context("fd_oracle")?;
    let reference = gaussian_reference(cfg);

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for c in 0..cfg.x0.len() {
        let mut row = ResultRow::new("bel_delta", c, bel.mean[c], bel.stderr[c], bel.n_paths);
        if let Some(r) = &reference {
            row = row.check(r[c], AGREEMENT_SE * bel.stderr[c]);
        }
        rows.push(row);
        rows.push(ResultRow::new("fd_delta", c, fd.value[c], fd.stderr[c], fd.n_paths));
        let diff = paired_difference(&samples[c], &fd.samples[c]).context("fd_oracle")?;
        rows.push(ResultRow::new("bel_minus_fd", c, diff.mean, diff.stderr, cfg.paths).check(0.0, AGREEMENT_SE * diff.stderr));
        if fd.below_noise_floor[c] {
            notes.push(format!("note: finite difference for component {c} is below the noise floor at bump {bump}"));
        }
    }
    Ok((rows, digest, notes))
}

fn delta_rv(cfg: &RunConfig, grid: GridSpec, epsilon: f64) -> CliResult<(Vec<ResultRow>, String)> {
    let vol_drift = mollify(cfg.drift.clone(), epsilon).context("rough_vol")?;
    let g = VolMap::new(cfg.g_alpha, cfg.g_gamma).context("rough_vol")?;
    let rv = RvConfig::new(cfg.mu, g, vol_drift, cfg.x1, cfg.x2, cfg.hurst).context("rough_vol")?;
    let model = RvModel::new(rv, grid).context("rough_vol")?;
    let a = cfg.weight_fn.load(cfg.horizon)?;
    let payoff = cfg.payoff;
    let samples = model.delta_samples(&|s, _| payoff.eval_scalar(s), &a, cfg.paths, cfg.seed).context("rough_vol")?;
    let digest = model.digest(&format!("{payoff:?}"), &a, cfg.paths, cfg.seed);
    let e = DeltaEstimate::from_samples(&samples, digest.clone()).context("rough_vol")?;
    let rows = (0..2).map(|c| ResultRow::new("sbel_delta", c, e.mean[c], e.stderr[c], e.n_paths)).collect();
    Ok((rows, digest))
}
