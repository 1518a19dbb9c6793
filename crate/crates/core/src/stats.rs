//! Order-deterministic Monte-Carlo reduction.
//!
//! Per-path results are collected in path-index order and reduced serially
//! with Neumaier-compensated sums, so estimates do not depend on how rayon
//! scheduled the paths.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    xs.into_iter().for_each(|x| acc.add(x));
    acc.value()
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    /// Two-pass mean and `sd / sqrt(n)`.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::Config(format!("need at least 2 samples, got {n}")));
        }
        if let Some(step) = xs.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { context: "per-path sample", step });
        }
        let mean = compensated_sum(xs.iter().copied()) / n as f64;
        let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
        let var = ss / (n as f64 - 1.0);
        Ok(Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        })
    }

    /// Sample standard deviation.
    pub fn std_dev(&self) -> f64 {
        self.stderr * (self.n as f64).sqrt()
    }

    /// `|mean - target| / stderr`, infinite when the stderr vanishes and the mean is off.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Statistics of `a_i - b_i` for two estimators that share seeds per path.
pub fn paired_difference(a: &[f64], b: &[f64]) -> Result<Estimate> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Estimate::from_samples(&diff)
}

/// Evaluates `f(path_index)` for `0..n_paths` in parallel and returns the
/// results in index order; the first error by index wins.
pub fn map_paths<T, F>(n_paths: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n_paths as u64).into_par_iter().map(&f).collect()
}

/// Runs `f` on a dedicated pool of `threads` workers (`None` keeps the global pool).
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
