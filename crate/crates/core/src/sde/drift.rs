//! Drift fields, including regime-switching examples and their smoothings.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fbm::GridSpec;
use crate::frac::HurstParam;
use crate::special::{erf, normal_pdf};

/// A drift `b(t, x)` with spatial Jacobian, in `d` dimensions.
pub trait DriftField: Send + Sync + fmt::Debug {
    /// Fixed dimension, or `None` if the field acts componentwise in any dimension.
    fn dim(&self) -> Option<usize>;
    fn value(&self, t: f64, x: &[f64], out: &mut [f64]);
    /// Row-major `d * d` Jacobian `∂b_i/∂x_j`.
    fn jacobian(&self, t: f64, x: &[f64], out: &mut [f64]);
    /// `sup |b|`, infinite when unbounded.
    fn bound(&self) -> f64;
}

/// Scalar profile `x ↦ (value, derivative)` applied to each component.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    Zero,
    Linear { lambda: f64 },
    // b_high on x > threshold, b_low otherwise; width 0 means a hard switch
    Switch { high: f64, low: f64, threshold: f64, width: f64 },
    // rate(x) (level - x), rate switching between a_high and a_low
    SwitchOu { high: f64, low: f64, threshold: f64, level: f64, width: f64 },
}

fn smooth_step(x: f64, threshold: f64, width: f64) -> (f64, f64) {
    if width == 0.0 {
        (if x > threshold { 1.0 } else { 0.0 }, 0.0)
    } else {
        let z = (x - threshold) / width;
        (0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2)), normal_pdf(z) / width)
    }
}

impl Profile {
    #[inline]
    fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            Profile::Zero => (0.0, 0.0),
            Profile::Linear { lambda } => (lambda * x, lambda),
            Profile::Switch { high, low, threshold, width } => {
                let (s, ds) = smooth_step(x, threshold, width);
                (low + (high - low) * s, (high - low) * ds)
            }
            Profile::SwitchOu { high, low, threshold, level, width } => {
                let (s, ds) = smooth_step(x, threshold, width);
                let rate = low + (high - low) * s;
                (rate * (level - x), (high - low) * ds * (level - x) - rate)
            }
        }
    }
}

/// Drift description.
#[derive(Clone)]
pub enum DriftSpec {
    Zero,
    /// `b(x) = λ x` componentwise.
    Linear { lambda: f64 },
    /// `b1` above the threshold, `b2` at or below it, componentwise.
    RegimeSwitch { b1: f64, b2: f64, threshold: f64 },
    /// Mean reversion to `level` at rate `a1` above the threshold and `a2` below.
    RegimeSwitchOu { a1: f64, a2: f64, threshold: f64, level: f64 },
    Custom(Arc<dyn DriftField>),
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl DriftSpec {
    fn profile(&self, width: f64) -> Option<Profile> {
        Some(match *self {
            DriftSpec::Zero => Profile::Zero,
            DriftSpec::Linear { lambda } => Profile::Linear { lambda },
            DriftSpec::RegimeSwitch { b1, b2, threshold } => Profile::Switch { high: b1, low: b2, threshold, width },
            DriftSpec::RegimeSwitchOu { a1, a2, threshold, level } => Profile::SwitchOu {
                high: a1,
                low: a2,
                threshold,
                level,
                width,
            },
            DriftSpec::Custom(_) => return None,
        })
    }

    /// Stable text form, used in reproducibility digests.
    pub fn describe(&self) -> String {
        match self {
            DriftSpec::Zero => "zero".into(),
            DriftSpec::Linear { lambda } => format!("linear({lambda})"),
            DriftSpec::RegimeSwitch { b1, b2, threshold } => format!("regime-switch({b1},{b2},{threshold})"),
            DriftSpec::RegimeSwitchOu { a1, a2, threshold, level } => {
                format!("regime-switch-ou({a1},{a2},{threshold},{level})")
            }
            DriftSpec::Custom(f) => format!("custom({f:?})"),
        }
    }

    /// `sup |b|`.
    pub fn bound(&self) -> f64 {
        match self {
            DriftSpec::Zero => 0.0,
            DriftSpec::Linear { lambda } if *lambda == 0.0 => 0.0,
            DriftSpec::Linear { .. } | DriftSpec::RegimeSwitchOu { .. } => f64::INFINITY,
            DriftSpec::RegimeSwitch { b1, b2, .. } => b1.abs().max(b2.abs()),
            DriftSpec::Custom(f) => f.bound(),
        }
    }

    /// `sup_t ∫ |b(t,x)| dx`, reported as metadata.
    pub fn l1_bound(&self) -> f64 {
        match self {
            DriftSpec::Zero => 0.0,
            DriftSpec::RegimeSwitch { b1, b2, .. } if *b1 == 0.0 && *b2 == 0.0 => 0.0,
            _ => f64::INFINITY,
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, DriftSpec::Zero | DriftSpec::Linear { .. } | DriftSpec::Custom(_))
    }

    /// Evaluates the unsmoothed field.
    pub fn value(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match self.profile(0.0) {
            Some(p) => out.iter_mut().zip(x).for_each(|(o, &xi)| *o = p.eval(xi).0),
            None => {
                if let DriftSpec::Custom(f) = self {
                    f.value(t, x, out)
                }
            }
        }
    }

    pub fn value_scalar(&self, t: f64, x: f64) -> f64 {
        let mut out = [0.0];
        self.value(t, &[x], &mut out);
        out[0]
    }
}

impl DriftField for DriftSpec {
    fn dim(&self) -> Option<usize> {
        match self {
            DriftSpec::Custom(f) => f.dim(),
            _ => None,
        }
    }

    fn value(&self, t: f64, x: &[f64], out: &mut [f64]) {
        DriftSpec::value(self, t, x, out)
    }

    /// Zero across a hard switch, which holds almost everywhere.
    fn jacobian(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match (self.profile(0.0), self) {
            (Some(p), _) => {
                let d = x.len();
                out.iter_mut().for_each(|v| *v = 0.0);
                for (i, &xi) in x.iter().enumerate() {
                    out[i * d + i] = p.eval(xi).1;
                }
            }
            (None, DriftSpec::Custom(f)) => f.jacobian(t, x, out),
            (None, _) => unreachable!("only custom drifts lack a profile"),
        }
    }

    fn bound(&self) -> f64 {
        DriftSpec::bound(self)
    }
}

/// A drift made differentiable: jump indicators are replaced by Gaussian
/// distribution functions of width `epsilon`.
#[derive(Debug, Clone)]
pub struct MollifiedDrift {
    base: DriftSpec,
    epsilon: f64,
    profile: Option<Profile>,
}

/// Smooths `base` at width `epsilon`; smooth kinds are returned unchanged.
pub fn mollify(base: DriftSpec, epsilon: f64) -> Result<MollifiedDrift> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("mollification width must be positive, got {epsilon}")));
    }
    let profile = base.profile(epsilon);
    Ok(MollifiedDrift { base, epsilon, profile })
}

/// Default width `4 sqrt(Δ) T^h`.
pub fn default_epsilon(grid: GridSpec, h: HurstParam) -> f64 {
    4.0 * grid.dt().sqrt() * grid.horizon().powf(h.value())
}

impl MollifiedDrift {
    pub fn base(&self) -> &DriftSpec {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Scalar value and derivative for componentwise kinds at `x`.
    pub fn scalar(&self, t: f64, x: f64) -> (f64, f64) {
        match self.profile {
            Some(p) => p.eval(x),
            None => {
                let (mut v, mut j) = ([0.0], [0.0]);
                self.value(t, &[x], &mut v);
                self.jacobian(t, &[x], &mut j);
                (v[0], j[0])
            }
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self.dim() {
            Some(e) if e != d => Err(Error::Dimension { expected: e, got: d }),
            _ => Ok(()),
        }
    }
}

impl DriftField for MollifiedDrift {
    fn dim(&self) -> Option<usize> {
        match &self.base {
            DriftSpec::Custom(f) => f.dim(),
            _ => None,
        }
    }

    fn value(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match (&self.profile, &self.base) {
            (Some(p), _) => out.iter_mut().zip(x).for_each(|(o, &xi)| *o = p.eval(xi).0),
            (None, DriftSpec::Custom(f)) => f.value(t, x, out),
            (None, _) => unreachable!("only custom drifts lack a profile"),
        }
    }

    fn jacobian(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match (&self.profile, &self.base) {
            (Some(p), _) => {
                let d = x.len();
                out.iter_mut().for_each(|v| *v = 0.0);
                for (i, &xi) in x.iter().enumerate() {
                    out[i * d + i] = p.eval(xi).1;
                }
            }
            (None, DriftSpec::Custom(f)) => f.jacobian(t, x, out),
            (None, _) => unreachable!("only custom drifts lack a profile"),
        }
    }

    fn bound(&self) -> f64 {
        self.base.bound()
    }
}
