use crate::error::{Error, Result};
use crate::fbm::JointPath;
use crate::sde::{DriftField, MollifiedDrift};

/// Euler states `x[k]` of one path, `(n + 1) * d` step-major.
#[derive(Debug, Clone)]
pub struct StatePath<'a> {
    x: Vec<f64>,
    d: usize,
    path: &'a JointPath,
}

impl<'a> StatePath<'a> {
    #[inline]
    pub fn x(&self, k: usize, c: usize) -> f64 {
        self.x[k * self.d + c]
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.x[k * self.d..(k + 1) * self.d]
    }

    pub fn terminal(&self) -> &[f64] {
        self.state(self.path.grid().n_steps())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn path(&self) -> &'a JointPath {
        self.path
    }
}

/// `X_{k+1} = X_k + b(t_k, X_k) Δ + (bh_{k+1} - bh_k)`.
///
/// The state is kept as `x0 + bh_k + D_k` with `D` the running drift sum, so
/// the noise enters without accumulated rounding.
pub fn euler_solve<'a>(drift: &MollifiedDrift, x0: &[f64], path: &'a JointPath) -> Result<StatePath<'a>> {
    euler_solve_with(drift, x0, path)
}

/// [`euler_solve`] for any drift field.
pub fn euler_solve_with<'a, F: DriftField + ?Sized>(drift: &F, x0: &[f64], path: &'a JointPath) -> Result<StatePath<'a>> {
    let d = path.dim();
    if x0.len() != d {
        return Err(Error::Dimension { expected: d, got: x0.len() });
    }
    if let Some(e) = drift.dim() {
        if e != d {
            return Err(Error::Dimension { expected: e, got: d });
        }
    }
    let grid = path.grid();
    let n = grid.n_steps();
    let dt = grid.dt();
    let mut x = vec![0.0; (n + 1) * d];
    x[..d].copy_from_slice(x0);
    let mut acc = vec![0.0; d];
    let mut b = vec![0.0; d];
    for k in 0..n {
        drift.value(grid.time(k), &x[k * d..(k + 1) * d], &mut b);
        for c in 0..d {
            acc[c] += b[c] * dt;
            let v = x0[c] + path.bh(k + 1, c) + acc[c];
            if !v.is_finite() {
                return Err(Error::NonFinite { context: "euler state", step: k + 1 });
            }
            x[(k + 1) * d + c] = v;
        }
    }
    Ok(StatePath { x, d, path })
}
