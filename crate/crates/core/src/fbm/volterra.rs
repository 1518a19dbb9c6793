//! Joint sampling of Wiener increments and the fBm they generate through the
//! square-root kernel.
//!
//! With `ζ_j` standard normal and `dW_j = sqrt(Δ) ζ_j`,
//!
//! ```text
//! bh_k = Σ_{j<k} w(k,j) dW_j + r_k,
//! ```
//!
//! where `w(k,j)` is the projection of `K(t_k, ·)` on the innovation of cell
//! `j` and `r` is a Gaussian vector independent of the increments carrying
//! what the projections miss: its covariance is `Cov(bh) - W Wᵀ`, so the joint
//! law of `(dW, bh)` is exact on the grid. Cells `j >= 1` use a flat
//! innovation (cell averages of the kernel). Cell 0 uses the innovation
//! `∫ ψ_0 dB` with `ψ_0(s) ∝ s^{h-1/2}`, which follows the shape of the kernel
//! near the origin.
//!
//! The kernel is homogeneous of degree `h - 1/2`, so `w(k,j) = Δ^{h-1/2} ŵ(k,j)`
//! where `ŵ` lives on the unit grid and depends only on `(h, n)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fbm::{GridSpec, PathSeed, Stream};
use crate::frac::{HurstParam, VolterraKernel};
use crate::quadrature::{integrate, integrate_power};

const NEAR_NODES: usize = 16;
const FAR_NODES: usize = 8;
/// Pivots below this fraction of the largest residual variance are treated as zero.
const SINGULAR_PIVOT: f64 = 1e-13;

/// Unit-grid weights for one `(h, n)`.
#[derive(Debug)]
struct UnitTable {
    // row k (1..=n) starts at offset[k] and holds ŵ(k, 0..k)
    offset: Vec<usize>,
    table: Vec<f64>,
    // lower factor of the residual covariance, row k laid out like `table`
    chol: Vec<f64>,
    // sd of r_k, k = 1..=n (index 0 unused)
    residual: Vec<f64>,
}

impl UnitTable {
    fn build(h: HurstParam, n: usize) -> Self {
        let hv = h.value();
        let k_eval = VolterraKernel::new(h);
        let psi0 = (2.0 * hv).sqrt();
        let mut offset = vec![0; n + 1];
        let mut table = Vec::with_capacity(n * (n + 1) / 2);
        for k in 1..=n {
            offset[k] = table.len();
            let t = k as f64;
            let mut row = vec![0.0; k];
            if k == 1 {
                // both ends of the only cell are singular
                let left = integrate_power(2.0 * hv - 1.0, 0.0, 0.5, |s| {
                    k_eval.eval(1.0, s, 1.0 - s) * s.powf(0.5 - hv) * psi0
                }, NEAR_NODES * 2);
                let right = integrate_power(hv - 0.5, 0.0, 0.5, |g| {
                    let s = 1.0 - g;
                    k_eval.eval(1.0, s, g) * g.powf(0.5 - hv) * psi0 * s.powf(hv - 0.5)
                }, NEAR_NODES * 2);
                row[0] = left + right;
            } else {
                row[0] = integrate_power(2.0 * hv - 1.0, 0.0, 1.0, |s| {
                    k_eval.eval(t, s, t - s) * s.powf(0.5 - hv) * psi0
                }, NEAR_NODES);
                for (j, w) in row.iter_mut().enumerate().take(k - 1).skip(1) {
                    let nodes = if j + 3 >= k || j == 1 { NEAR_NODES } else { FAR_NODES };
                    let dist = (k - j) as f64;
                    *w = integrate(|x| k_eval.eval(t, j as f64 + x, dist - x), 0.0, 1.0, nodes);
                }
                let diag = |g: f64| k_eval.eval(t, t - g, g) * g.powf(0.5 - hv);
                row[k - 1] = integrate_power(hv - 0.5, 0.0, 1.0, diag, NEAR_NODES);
            }
            table.extend_from_slice(&row);
        }
        let mut t = Self { offset, table, chol: Vec::new(), residual: vec![0.0; n + 1] };
        t.factor_residual(hv, n);
        t
    }

    /// Residual covariance `k^{2h}/2 + l^{2h}/2 - |k-l|^{2h}/2 - Σ_j ŵ(k,j) ŵ(l,j)`,
    /// factored with zero columns where it is numerically singular.
    fn factor_residual(&mut self, hv: f64, n: usize) {
        let p = |x: usize| (x as f64).powf(2.0 * hv);
        let mut a = vec![0.0; n * n];
        for k in 1..=n {
            let rk = self.row(k);
            for l in 1..=k {
                let rl = self.row(l);
                let proj: f64 = rk[..l].iter().zip(rl).map(|(x, y)| x * y).sum();
                let v = 0.5 * (p(k) + p(l) - p(k - l)) - proj;
                a[(k - 1) * n + (l - 1)] = v;
                a[(l - 1) * n + (k - 1)] = v;
            }
        }
        let scale = (0..n).fold(0.0f64, |m, i| m.max(a[i * n + i].abs()));
        for j in 0..n {
            let mut d = a[j * n + j];
            for q in 0..j {
                d -= a[j * n + q] * a[j * n + q];
            }
            if d <= SINGULAR_PIVOT * scale {
                for i in j..n {
                    a[i * n + j] = 0.0;
                }
                continue;
            }
            let l = d.sqrt();
            a[j * n + j] = l;
            for i in j + 1..n {
                let mut v = a[i * n + j];
                for q in 0..j {
                    v -= a[i * n + q] * a[j * n + q];
                }
                a[i * n + j] = v / l;
            }
        }
        self.chol = Vec::with_capacity(self.table.len());
        for k in 1..=n {
            let r = &a[(k - 1) * n..(k - 1) * n + k];
            self.residual[k] = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            self.chol.extend_from_slice(r);
        }
    }

    #[inline]
    fn row(&self, k: usize) -> &[f64] {
        &self.table[self.offset[k]..self.offset[k] + k]
    }

    #[inline]
    fn chol_row(&self, k: usize) -> &[f64] {
        &self.chol[self.offset[k]..self.offset[k] + k]
    }
}

fn unit_table(h: HurstParam, n: usize) -> Arc<UnitTable> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<UnitTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (h.value().to_bits(), n);
    if let Some(t) = cache.lock().expect("weight cache poisoned").get(&key) {
        return Arc::clone(t);
    }
    let built = Arc::new(UnitTable::build(h, n));
    let mut guard = cache.lock().expect("weight cache poisoned");
    Arc::clone(guard.entry(key).or_insert(built))
}

/// Precomputed kernel weights for one `(grid, h)`; cheap to clone and share.
#[derive(Debug, Clone)]
pub struct VolterraWeights {
    grid: GridSpec,
    h: HurstParam,
    unit: Arc<UnitTable>,
    // Δ^h: maps unit-grid sums of standard normals to physical fBm values
    scale: f64,
}

impl VolterraWeights {
    pub fn new(grid: GridSpec, h: HurstParam) -> Self {
        let unit = unit_table(h, grid.n_steps());
        Self {
            grid,
            h,
            unit,
            scale: grid.dt().powf(h.value()),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn hurst(&self) -> HurstParam {
        self.h
    }

    /// Physical weight `w(k, j)` multiplying `dW_j` in `bh_k`, `j < k`.
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        self.unit.row(k)[j] * self.scale / self.grid.dt().sqrt()
    }

    /// Standard deviation of the residual draw entering `bh_k`.
    pub fn residual_sd(&self, k: usize) -> f64 {
        self.unit.residual[k] * self.scale
    }

    /// Innovation profile of cell 0 evaluated at `s` in `(0, Δ]`, normalised
    /// so that `∫_0^Δ ψ_0^2 = Δ`.
    pub fn first_cell_profile(&self, s: f64) -> f64 {
        let h = self.h.value();
        (2.0 * h * self.grid.dt().powf(1.0 - 2.0 * h)).sqrt() * s.powf(h - 0.5)
    }

    /// Builds the path from standard normals `z` (increments) and `e`
    /// (residuals), each laid out as `n * d` step-major.
    pub fn assemble(&self, d: usize, z: &[f64], e: &[f64]) -> Result<JointPath> {
        let n = self.grid.n_steps();
        if z.len() != n * d || e.len() != n * d {
            return Err(Error::Dimension {
                expected: n * d,
                got: z.len().min(e.len()),
            });
        }
        let sq = self.grid.dt().sqrt();
        let dw: Vec<f64> = z.iter().map(|v| v * sq).collect();
        let mut bh = vec![0.0; (n + 1) * d];
        let mut residual = vec![0.0; n * d];
        for k in 1..=n {
            let row = self.unit.row(k);
            let chol = self.unit.chol_row(k);
            for c in 0..d {
                let mut acc = 0.0;
                let mut res = 0.0;
                for (j, (w, l)) in row.iter().zip(chol).enumerate() {
                    acc += w * z[j * d + c];
                    res += l * e[j * d + c];
                }
                let r = res * self.scale;
                residual[(k - 1) * d + c] = r;
                bh[k * d + c] = acc * self.scale + r;
            }
        }
        Ok(JointPath {
            grid: self.grid,
            d,
            dw,
            bh,
            residual,
        })
    }

    pub fn sample(&self, d: usize, seed: PathSeed) -> Result<JointPath> {
        if d == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let n = self.grid.n_steps();
        let mut rng = seed.rng(Stream::Fbm);
        let z: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
        let e: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
        self.assemble(d, &z, &e)
    }
}

/// Draws one joint `(dW, bh)` path; weights are cached per `(h, n)`.
pub fn sample_joint_path(grid: GridSpec, h: HurstParam, d: usize, seed: PathSeed) -> Result<JointPath> {
    VolterraWeights::new(grid, h).sample(d, seed)
}

/// Wiener increments and fBm values on one grid, `d` independent components.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPath {
    grid: GridSpec,
    d: usize,
    // n * d, step-major
    dw: Vec<f64>,
    // (n + 1) * d
    bh: Vec<f64>,
    // n * d; entry k-1 is the residual inside bh_k
    residual: Vec<f64>,
}

impl JointPath {
    /// The path with every draw set to zero.
    pub fn zero(grid: GridSpec, d: usize) -> Self {
        let n = grid.n_steps();
        Self {
            grid,
            d,
            dw: vec![0.0; n * d],
            bh: vec![0.0; (n + 1) * d],
            residual: vec![0.0; n * d],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Increment over `[t_j, t_{j+1}]`, component `c`.
    #[inline]
    pub fn dw(&self, j: usize, c: usize) -> f64 {
        self.dw[j * self.d + c]
    }

    #[inline]
    pub fn bh(&self, k: usize, c: usize) -> f64 {
        self.bh[k * self.d + c]
    }

    pub fn dw_all(&self) -> &[f64] {
        &self.dw
    }

    pub fn bh_all(&self) -> &[f64] {
        &self.bh
    }

    pub fn residual(&self, k: usize, c: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.residual[(k - 1) * self.d + c]
        }
    }

    pub fn bh_component(&self, c: usize) -> Vec<f64> {
        (0..=self.grid.n_steps()).map(|k| self.bh(k, c)).collect()
    }

    /// Largest `|bh_k - Σ_j w(k,j) dW_j - r_k|`, recomputed from the physical weights.
    pub fn consistency_error(&self, weights: &VolterraWeights) -> f64 {
        let n = self.grid.n_steps();
        let mut worst = self.bh[..self.d].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 1..=n {
            for c in 0..self.d {
                let mut acc = self.residual(k, c);
                for j in 0..k {
                    acc += weights.weight(k, j) * self.dw(j, c);
                }
                worst = worst.max((acc - self.bh(k, c)).abs());
            }
        }
        worst
    }
}
