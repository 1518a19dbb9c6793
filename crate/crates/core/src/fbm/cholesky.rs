//! Exact Gaussian sampling of fBm on a grid from its covariance matrix.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fbm::{GridSpec, PathSeed, Stream};
use crate::frac::{cov_rh, HurstParam, SampledFunction};

pub const MAX_CHOLESKY_STEPS: usize = 4096;
const JITTER: f64 = 1e-12;

/// In-place lower Cholesky factor of a row-major SPD matrix; `Err(pivot)` on failure.
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> std::result::Result<(), usize> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for p in 0..j {
            diag -= a[j * n + p] * a[j * n + p];
        }
        if !(diag > 0.0) {
            return Err(j);
        }
        let l = diag.sqrt();
        a[j * n + j] = l;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for p in 0..j {
                v -= a[i * n + p] * a[j * n + p];
            }
            a[i * n + j] = v / l;
        }
        for i in 0..j {
            a[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Factor of the covariance over `t_1..t_n`, reusable across paths.
#[derive(Debug, Clone)]
pub struct CholeskySampler {
    grid: GridSpec,
    factor: Vec<f64>,
    jitter: f64,
}

impl CholeskySampler {
    pub fn new(grid: GridSpec, h: HurstParam) -> Result<Self> {
        let n = grid.n_steps();
        if n > MAX_CHOLESKY_STEPS {
            return Err(Error::Grid(format!("dense factorization limited to {MAX_CHOLESKY_STEPS} steps, got {n}")));
        }
        let times = grid.times();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let c = cov_rh(h, times[i + 1], times[j + 1])?;
                cov[i * n + j] = c;
                cov[j * n + i] = c;
            }
        }
        let mut a = cov.clone();
        match cholesky_in_place(&mut a, n) {
            Ok(()) => Ok(Self { grid, factor: a, jitter: 0.0 }),
            Err(_) => {
                let mut a = cov;
                for i in 0..n {
                    a[i * n + i] += JITTER;
                }
                cholesky_in_place(&mut a, n).map_err(|pivot| Error::NotPositiveDefinite { pivot, jitter: JITTER })?;
                Ok(Self { grid, factor: a, jitter: JITTER })
            }
        }
    }

    /// Diagonal jitter that was needed, 0 if none.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sample(&self, seed: PathSeed) -> Result<SampledFunction> {
        let n = self.grid.n_steps();
        let mut rng = seed.rng(Stream::Cholesky);
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut values = vec![0.0; n + 1];
        for i in 0..n {
            let row = &self.factor[i * n..i * n + i + 1];
            values[i + 1] = row.iter().zip(&z).map(|(l, z)| l * z).sum();
        }
        SampledFunction::new(self.grid.times(), values)
    }
}

/// One exact fBm sample; builds the factor on every call.
pub fn sample_cholesky(grid: GridSpec, h: HurstParam, seed: PathSeed) -> Result<SampledFunction> {
    CholeskySampler::new(grid, h)?.sample(seed)
}
