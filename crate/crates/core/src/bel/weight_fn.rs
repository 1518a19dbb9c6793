use crate::error::{Error, Result};
use crate::fbm::GridSpec;
use crate::frac::SampledFunction;

/// Time weighting `a` with `∫_0^T a = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFn {
    /// `a ≡ 1/T`.
    Uniform { horizon: f64 },
    /// Piecewise-linear `a` from samples on `[0, T]`.
    Custom { samples: SampledFunction },
}

impl WeightFn {
    pub fn uniform(horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Config(format!("weight horizon must be positive, got {horizon}")));
        }
        Ok(WeightFn::Uniform { horizon })
    }

    /// Checks that the samples start at 0, are finite and integrate to 1
    /// within 1e-10 (trapezoid, which is exact for the interpolant).
    pub fn custom(samples: SampledFunction) -> Result<Self> {
        let g = samples.grid();
        if g[0] != 0.0 || g.len() < 2 {
            return Err(Error::Config("custom weight must be sampled on a grid starting at 0".into()));
        }
        samples.check_finite("custom weight")?;
        let v = samples.values();
        let total: f64 = (0..g.len() - 1).map(|i| 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i])).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("custom weight integrates to {total}, expected 1")));
        }
        Ok(WeightFn::Custom { samples })
    }

    pub fn horizon(&self) -> f64 {
        match self {
            WeightFn::Uniform { horizon } => *horizon,
            WeightFn::Custom { samples } => *samples.grid().last().expect("non-empty grid"),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WeightFn::Uniform { .. } => "uniform".into(),
            WeightFn::Custom { samples } => format!("custom({} points)", samples.len()),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            WeightFn::Uniform { horizon } => 1.0 / horizon,
            WeightFn::Custom { samples } => {
                let g = samples.grid();
                let v = samples.values();
                if t <= g[0] {
                    return v[0];
                }
                match g.iter().position(|&x| x >= t) {
                    None => *v.last().expect("non-empty"),
                    Some(i) => {
                        let w = (t - g[i - 1]) / (g[i] - g[i - 1]);
                        v[i - 1] + w * (v[i] - v[i - 1])
                    }
                }
            }
        }
    }

    /// Mean of `a` over `[t0, t1]`.
    pub fn cell_average(&self, t0: f64, t1: f64) -> f64 {
        match self {
            WeightFn::Uniform { horizon } => 1.0 / horizon,
            WeightFn::Custom { samples } => {
                // exact integral of the interpolant: trapezoid on the merged breakpoints
                let mut pts = vec![t0];
                pts.extend(samples.grid().iter().copied().filter(|&x| x > t0 && x < t1));
                pts.push(t1);
                let total: f64 = pts
                    .windows(2)
                    .map(|w| 0.5 * (self.value(w[0]) + self.value(w[1])) * (w[1] - w[0]))
                    .sum();
                total / (t1 - t0)
            }
        }
    }

    /// Cell averages on every cell of `grid`.
    pub fn cell_averages(&self, grid: GridSpec) -> Result<Vec<f64>> {
        if (self.horizon() - grid.horizon()).abs() > 1e-12 * grid.horizon() {
            return Err(Error::Config(format!(
                "weight function horizon {} differs from grid horizon {}",
                self.horizon(),
                grid.horizon()
            )));
        }
        Ok((0..grid.n_steps()).map(|m| self.cell_average(grid.time(m), grid.time(m + 1))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_normalisation_is_enforced() {
        let ok = SampledFunction::from_fn(2.0, 10, |t| t / 2.0).unwrap();
        assert!(WeightFn::custom(ok).is_ok());
        let bad = SampledFunction::from_fn(2.0, 10, |t| t).unwrap();
        assert!(WeightFn::custom(bad).is_err());
        assert!(WeightFn::uniform(0.0).is_err());
    }

    #[test]
    fn averages_integrate_the_interpolant() {
        let a = WeightFn::custom(SampledFunction::from_fn(2.0, 3, |t| t / 2.0).unwrap()).unwrap();
        let g = GridSpec::new(2.0, 8).unwrap();
        let avg = a.cell_averages(g).unwrap();
        let total: f64 = avg.iter().map(|v| v * g.dt()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!((avg[0] - 0.0625).abs() < 1e-14);
        assert!(a.cell_averages(GridSpec::new(1.0, 8).unwrap()).is_err());
    }
}
