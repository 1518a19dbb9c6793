//! Flat `key = value` run configuration, overridable by flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use fracdelta::bel::{Payoff, WeightFn};
use fracdelta::frac::{HurstParam, SampledFunction};
use fracdelta::sde::DriftSpec;

use crate::error::{CliError, CliResult};

/// Keys in the order they are written to a resolved config.
pub const KEYS: [&str; 19] = [
    "mode", "hurst", "horizon", "steps", "paths", "seed", "drift", "epsilon", "payoff", "strike", "weight-fn", "x0",
    "x1", "x2", "mu", "g-alpha", "g-gamma", "bump", "out",
];

const DEFAULTS: [(&str, &str); 19] = [
    ("mode", "delta-sde"),
    ("hurst", "0.1"),
    ("horizon", "1"),
    ("steps", "128"),
    ("paths", "20000"),
    ("seed", "2024"),
    ("drift", "zero"),
    ("epsilon", "auto"),
    ("payoff", "identity"),
    ("strike", "0"),
    ("weight-fn", "uniform"),
    ("x0", "0"),
    ("x1", "1"),
    ("x2", "0"),
    ("mu", "0.05"),
    ("g-alpha", "0.2"),
    ("g-gamma", "0.3"),
    ("bump", "auto"),
    ("out", "fracdelta-results.csv"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Paths,
    DeltaSde,
    DeltaRv,
    Validate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Paths => "paths",
            Mode::DeltaSde => "delta-sde",
            Mode::DeltaRv => "delta-rv",
            Mode::Validate => "validate",
        }
    }
}

/// Raw settings with the origin of each value, for error messages.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, (String, String)>,
}

impl Settings {
    pub fn with_defaults() -> Self {
        let mut s = Self::default();
        for (k, v) in DEFAULTS {
            s.values.insert(k.into(), (v.into(), "default".into()));
        }
        s
    }

    /// Merges a config file; later keys override earlier ones.
    pub fn merge_text(&mut self, text: &str, source_name: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Parse { source_name: source_name.into(), line: i + 1, message };
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(err(format!("unknown key `{k}`")));
            }
            if v.is_empty() {
                return Err(err(format!("empty value for `{k}`")));
            }
            self.values.insert(k.into(), (v.into(), format!("{source_name}:{}", i + 1)));
        }
        Ok(())
    }

    pub fn set_flag(&mut self, key: &str, value: &str) {
        self.values.insert(key.into(), (value.into(), format!("--{key}")));
    }

    fn raw(&self, key: &str) -> (&str, &str) {
        let (v, o) = self.values.get(key).expect("every key has a default");
        (v, o)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let (v, origin) = self.raw(key);
        v.parse::<T>().map_err(|e| value_err(key, origin, e.to_string()))
    }

    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mode = match self.raw("mode") {
            ("paths", _) => Mode::Paths,
            ("delta-sde", _) => Mode::DeltaSde,
            ("delta-rv", _) => Mode::DeltaRv,
            ("validate", _) => Mode::Validate,
            (v, o) => return Err(value_err("mode", o, format!("`{v}` is not one of paths, delta-sde, delta-rv, validate"))),
        };
        let hv: f64 = self.parse("hurst")?;
        let hurst = HurstParam::new(hv).map_err(|e| value_err("hurst", self.raw("hurst").1, e.to_string()))?;
        let horizon: f64 = self.parse("horizon")?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(value_err("horizon", self.raw("horizon").1, "must be positive".into()));
        }
        let steps: usize = self.parse("steps")?;
        let paths: usize = self.parse("paths")?;
        let (d_raw, d_origin) = self.raw("drift");
        let drift = parse_drift(d_raw).map_err(|m| value_err("drift", d_origin, m))?;
        let epsilon = parse_auto(self, "epsilon")?;
        let bump = parse_auto(self, "bump")?;
        let strike: f64 = self.parse("strike")?;
        let payoff = match self.raw("payoff") {
            ("identity", _) => Payoff::Identity,
            ("call", _) => Payoff::Call { strike },
            ("put", _) => Payoff::Put { strike },
            ("digital", _) => Payoff::Digital { strike },
            (v, o) => return Err(value_err("payoff", o, format!("`{v}` is not one of identity, call, put, digital"))),
        };
        let (w_raw, w_origin) = self.raw("weight-fn");
        let weight_fn = WeightSpec::parse(w_raw).map_err(|m| value_err("weight-fn", w_origin, m))?;
        let (x0_raw, x0_origin) = self.raw("x0");
        let x0 = x0_raw
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| value_err("x0", x0_origin, e.to_string()))?;
        Ok(RunConfig {
            mode,
            hurst,
            horizon,
            steps,
            paths,
            seed: self.parse("seed")?,
            drift,
            epsilon,
            payoff,
            weight_fn,
            x0,
            x1: self.parse("x1")?,
            x2: self.parse("x2")?,
            mu: self.parse("mu")?,
            g_alpha: self.parse("g-alpha")?,
            g_gamma: self.parse("g-gamma")?,
            bump,
            out: PathBuf::from(self.raw("out").0),
        })
    }
}

fn value_err(key: &str, origin: &str, message: String) -> CliError {
    CliError::Value { key: key.into(), origin: origin.into(), message }
}

fn parse_auto(s: &Settings, key: &str) -> CliResult<Option<f64>> {
    match s.raw(key) {
        ("auto", _) => Ok(None),
        (v, o) => match v.parse::<f64>() {
            Ok(x) if x > 0.0 && x.is_finite() => Ok(Some(x)),
            Ok(_) => Err(value_err(key, o, "must be positive or `auto`".into())),
            Err(e) => Err(value_err(key, o, e.to_string())),
        },
    }
}

/// `zero`, `linear(λ)`, `regime-switch(b1,b2,R)`, `regime-switch-ou(a1,a2,R,level)`.
pub fn parse_drift(s: &str) -> Result<DriftSpec, String> {
    let s = s.trim();
    if s == "zero" {
        return Ok(DriftSpec::Zero);
    }
    let (name, rest) = s.split_once('(').ok_or_else(|| format!("unknown drift `{s}`"))?;
    let args = rest.strip_suffix(')').ok_or_else(|| format!("missing `)` in `{s}`"))?;
    let nums = args
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|e| format!("`{a}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match (name.trim(), nums.as_slice()) {
        ("linear", &[lambda]) => Ok(DriftSpec::Linear { lambda }),
        ("regime-switch", &[b1, b2, threshold]) => Ok(DriftSpec::RegimeSwitch { b1, b2, threshold }),
        ("regime-switch-ou", &[a1, a2, threshold, level]) => Ok(DriftSpec::RegimeSwitchOu { a1, a2, threshold, level }),
        (n, a) => Err(format!("unknown drift `{n}` with {} arguments", a.len())),
    }
}

/// `uniform` or `csv:PATH` with `t,a` rows.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Uniform,
    Csv(PathBuf),
}

impl WeightSpec {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(WeightSpec::Uniform),
            _ => s
                .strip_prefix("csv:")
                .map(|p| WeightSpec::Csv(PathBuf::from(p)))
                .ok_or_else(|| format!("`{s}` is neither `uniform` nor `csv:PATH`")),
        }
    }

    pub fn load(&self, horizon: f64) -> CliResult<WeightFn> {
        let numeric = |e: fracdelta::Error| value_err("weight-fn", "file", e.to_string());
        match self {
            WeightSpec::Uniform => WeightFn::uniform(horizon).map_err(numeric),
            WeightSpec::Csv(path) => {
                let name = path.display().to_string();
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: name.clone(), source })?;
                let (mut t, mut a) = (Vec::new(), Vec::new());
                for (i, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
                        continue;
                    }
                    let bad = |m: String| CliError::Parse { source_name: name.clone(), line: i + 1, message: m };
                    let (x, y) = line.split_once(',').ok_or_else(|| bad(format!("expected `t,a`, got `{line}`")))?;
                    t.push(x.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?);
                    a.push(y.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?);
                }
                WeightFn::custom(SampledFunction::new(t, a).map_err(numeric)?).map_err(numeric)
            }
        }
    }

    fn render(&self) -> String {
        match self {
            WeightSpec::Uniform => "uniform".into(),
            WeightSpec::Csv(p) => format!("csv:{}", p.display()),
        }
    }
}

/// Fully typed run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub hurst: HurstParam,
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub drift: DriftSpec,
    /// `None` selects the grid-dependent default.
    pub epsilon: Option<f64>,
    pub payoff: Payoff,
    pub weight_fn: WeightSpec,
    pub x0: Vec<f64>,
    pub x1: f64,
    pub x2: f64,
    pub mu: f64,
    pub g_alpha: f64,
    pub g_gamma: f64,
    /// `None` selects the payoff-dependent default.
    pub bump: Option<f64>,
    pub out: PathBuf,
}

impl RunConfig {
    /// Resolved `key = value` text; feeding it back reproduces the run.
    pub fn render(&self, epsilon: f64, bump: f64) -> String {
        let (payoff, strike) = match self.payoff {
            Payoff::Identity => ("identity", 0.0),
            Payoff::Call { strike } => ("call", strike),
            Payoff::Put { strike } => ("put", strike),
            Payoff::Digital { strike } => ("digital", strike),
        };
        let x0: Vec<String> = self.x0.iter().map(f64::to_string).collect();
        let vals = [
            self.mode.as_str().to_string(),
            self.hurst.value().to_string(),
            self.horizon.to_string(),
            self.steps.to_string(),
            self.paths.to_string(),
            self.seed.to_string(),
            self.drift.describe(),
            epsilon.to_string(),
            payoff.into(),
            strike.to_string(),
            self.weight_fn.render(),
            x0.join(","),
            self.x1.to_string(),
            self.x2.to_string(),
            self.mu.to_string(),
            self.g_alpha.to_string(),
            self.g_gamma.to_string(),
            bump.to_string(),
            self.out.display().to_string(),
        ];
        let mut s = String::new();
        for (k, v) in KEYS.iter().zip(vals) {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_flags_layer_over_defaults() {
        let mut s = Settings::with_defaults();
        s.merge_text("# comment\nhurst = 0.2\n\npayoff = call # inline\nstrike=0.5\n", "run.cfg").unwrap();
        s.set_flag("hurst", "0.05");
        let c = s.resolve().unwrap();
        assert_eq!(c.hurst.value(), 0.05);
        assert_eq!(c.payoff, Payoff::Call { strike: 0.5 });
        assert_eq!(c.mode, Mode::DeltaSde);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let mut s = Settings::with_defaults();
        let e = s.merge_text("hurst = 0.1\nbogus = 1\n", "run.cfg").unwrap_err();
        assert_eq!(e.to_string(), "run.cfg:2: unknown key `bogus`");
        let e = s.merge_text("\n\nhurst 0.1\n", "run.cfg").unwrap_err();
        assert!(e.to_string().starts_with("run.cfg:3:"));
        let mut s = Settings::with_defaults();
        s.merge_text("\nhurst = 0.7\n", "run.cfg").unwrap();
        assert!(s.resolve().unwrap_err().to_string().contains("run.cfg:2"));
    }

    #[test]
    fn drift_grammar_round_trips() {
        for d in ["zero", "linear(0.5)", "regime-switch(1,-1,0)", "regime-switch-ou(2,0.5,0.1,0)"] {
            assert_eq!(parse_drift(d).unwrap().describe(), d);
        }
        assert!(parse_drift("linear(1,2)").is_err());
        assert!(parse_drift("wild").is_err());
    }

    #[test]
    fn rendered_config_resolves_to_the_same_run() {
        let mut s = Settings::with_defaults();
        s.merge_text("drift = regime-switch(1,-1,0)\nx0 = 0.1,0.2\npayoff = digital\nstrike = 0.3\n", "a").unwrap();
        let c = s.resolve().unwrap();
        let text = c.render(0.05, 0.05);
        let mut again = Settings::with_defaults();
        again.merge_text(&text, "resolved").unwrap();
        let c2 = again.resolve().unwrap();
        assert_eq!(c2.render(0.05, 0.05), text);
        assert_eq!(c2.epsilon, Some(0.05));
        assert_eq!(c2.x0, vec![0.1, 0.2]);
    }
}
