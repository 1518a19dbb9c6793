use crate::error::{Error, Result};

/// A function sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Grid("empty grid".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Grid(format!("grid not strictly increasing at index {}", i + 1)));
        }
        Ok(Self { grid, values })
    }

    /// Uniform grid `k * t_end / n`, `k = 0..=n`, with values `f(t_k)`.
    pub fn from_fn<F: FnMut(f64) -> f64>(t_end: f64, n: usize, mut f: F) -> Result<Self> {
        if n == 0 || !(t_end > 0.0) {
            return Err(Error::Grid(format!("need n >= 1 and t_end > 0, got n={n}, t_end={t_end}")));
        }
        let grid: Vec<f64> = (0..=n).map(|k| t_end * k as f64 / n as f64).collect();
        let values = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.len());
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Uniform step if the grid is uniform to relative 1e-12, else `None`.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.grid.len() < 2 {
            return None;
        }
        let n = self.grid.len() - 1;
        let h = (self.grid[n] - self.grid[0]) / n as f64;
        let tol = 1e-12 * (self.grid[n].abs() + h);
        self.grid
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - (self.grid[0] + h * k as f64)).abs() <= tol)
            .then_some(h)
    }

    pub(crate) fn check_finite(&self, context: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(step) => Err(Error::NonFinite { context, step }),
            None => Ok(()),
        }
    }
}

/// Order of a Riemann–Liouville operator, `0 < alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SampledFunction::new(vec![], vec![]).is_err());
        assert!(SampledFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(SampledFunction::new(vec![0.0, 1.0, 1.0], vec![1.0; 3]).is_err());
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.2).is_err());
        assert!(FracOrder::new(1.0).is_ok());
    }

    #[test]
    fn uniform_detection() {
        let f = SampledFunction::from_fn(2.0, 8, |t| t).unwrap();
        assert!((f.uniform_step().unwrap() - 0.25).abs() < 1e-15);
        let g = SampledFunction::new(vec![0.0, 0.1, 0.3], vec![0.0; 3]).unwrap();
        assert!(g.uniform_step().is_none());
    }
}
