//! Batch driver: path dumps, delta estimates and the property suite.

mod config;
mod error;
mod run;
mod validate;

use std::process::ExitCode;

use clap::Parser;

use crate::config::{Mode, Settings};
use crate::error::{CliError, CliResult};

/// Sensitivities of SDEs with singular drift driven by rough fractional noise.
///
/// Values come from built-in defaults, then `--config FILE`, then flags.
/// Worker threads are taken from FRACDELTA_THREADS (default: all cores).
#[derive(Debug, Parser)]
#[command(name = "fracdelta", version)]
struct Cli {
    /// Flat `key = value` file; keys are the long flag names.
    #[arg(long, value_name = "FILE")]
    config: Option<std::path::PathBuf>,
    /// paths | delta-sde | delta-rv | validate
    #[arg(long)]
    mode: Option<String>,
    /// Hurst parameter in (0, 1/2).
    #[arg(long)]
    hurst: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    /// Number of time steps.
    #[arg(long)]
    steps: Option<String>,
    /// Number of Monte-Carlo paths.
    #[arg(long)]
    paths: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// zero | linear(l) | regime-switch(b1,b2,R) | regime-switch-ou(a1,a2,R,level)
    #[arg(long)]
    drift: Option<String>,
    /// Mollification width, or `auto`.
    #[arg(long)]
    epsilon: Option<String>,
    /// identity | call | put | digital
    #[arg(long)]
    payoff: Option<String>,
    #[arg(long)]
    strike: Option<String>,
    /// uniform | csv:PATH (rows `t,a`)
    #[arg(long = "weight-fn")]
    weight_fn: Option<String>,
    /// Initial point, comma-separated; its length is the dimension.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial stock price (delta-rv).
    #[arg(long)]
    x1: Option<String>,
    /// Initial volatility factor (delta-rv).
    #[arg(long, allow_hyphen_values = true)]
    x2: Option<String>,
    /// Stock drift (delta-rv).
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Volatility floor (delta-rv).
    #[arg(long = "g-alpha")]
    g_alpha: Option<String>,
    /// Volatility amplitude (delta-rv).
    #[arg(long = "g-gamma")]
    g_gamma: Option<String>,
    /// Finite-difference half-width, or `auto`.
    #[arg(long)]
    bump: Option<String>,
    /// Results file; the resolved config is written beside it with extension `.config`.
    #[arg(long)]
    out: Option<String>,
}

impl Cli {
    fn flags(&self) -> [(&'static str, &Option<String>); 19] {
        [
            ("mode", &self.mode),
            ("hurst", &self.hurst),
            ("horizon", &self.horizon),
            ("steps", &self.steps),
            ("paths", &self.paths),
            ("seed", &self.seed),
            ("drift", &self.drift),
            ("epsilon", &self.epsilon),
            ("payoff", &self.payoff),
            ("strike", &self.strike),
            ("weight-fn", &self.weight_fn),
            ("x0", &self.x0),
            ("x1", &self.x1),
            ("x2", &self.x2),
            ("mu", &self.mu),
            ("g-alpha", &self.g_alpha),
            ("g-gamma", &self.g_gamma),
            ("bump", &self.bump),
            ("out", &self.out),
        ]
    }
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("FRACDELTA_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Value {
                key: "FRACDELTA_THREADS".into(),
                origin: "environment".into(),
                message: format!("`{v}` is not a positive integer"),
            }),
        },
    }
}

fn main_inner(cli: Cli) -> CliResult<ExitCode> {
    let mut settings = Settings::with_defaults();
    if let Some(path) = &cli.config {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: name.clone(), source })?;
        settings.merge_text(&text, &name)?;
    }
    for (key, value) in cli.flags() {
        if let Some(v) = value {
            settings.set_flag(key, v);
        }
    }
    let cfg = settings.resolve()?;
    let outcome = run::execute(&cfg, threads_from_env()?)?;
    for n in &outcome.notes {
        eprintln!("{n}");
    }
    if cfg.mode != Mode::Paths {
        print!("{}", std::fs::read_to_string(&outcome.results).unwrap_or_default());
    }
    eprintln!(
        "{}; results: {}; resolved config: {}",
        outcome.summary,
        outcome.results.display(),
        outcome.resolved.display()
    );
    if cfg.mode == Mode::Validate && !outcome.failures.is_empty() {
        for f in &outcome.failures {
            eprintln!("FAIL {f}");
        }
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
