//! Cell-interaction table behind the Malliavin weight.
//!
//! After exchanging the order of integration the weight is `C Σ_k G_kᵀ dW_k`
//! with the adapted matrices
//!
//! ```text
//! G_k = Σ_{m<=k} a_m M(k,m) J̄_m,
//! M(k,m) = (1/Δ) ∫_{cell k} ψ_k(s) s^{h-1/2} ∫_{cell m, r<s} r^{1/2-h} (s-r)^{-h-1/2} dr ds,
//! ```
//!
//! where `a_m` is the cell average of the time weighting, `J̄_m` the mean of
//! the flow at the ends of cell `m`, and `ψ_k` the innovation profile of cell
//! `k` used by the path sampler. `M(k,m) = Δ^{1/2-h} M̂(k,m)` with `M̂` on the
//! unit grid.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fbm::{GridSpec, JointPath};
use crate::frac::{big_c_h, HurstParam};
use crate::quadrature::{integrate, integrate_power, rule};
use crate::sde::FlowPath;
use crate::special::beta;

const NODES: usize = 16;
const GRADED_LEVELS: usize = 48;

#[derive(Debug)]
struct UnitTable {
    // row k (0..n) starts at offset[k] and holds M̂(k, 0..=k)
    offset: Vec<usize>,
    table: Vec<f64>,
}

/// `∫_lo^hi ρ^{1/2-h} (σ-ρ)^{-h-1/2} dρ` for `hi <= σ`.
fn inner(h: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let q = 0.5 - h;
    let (mut acc, from) = if lo == 0.0 {
        let c = 0.5 * hi;
        (integrate_power(q, 0.0, c, |r| (sigma - r).powf(-h - 0.5), NODES), c)
    } else {
        (0.0, lo)
    };
    acc += integrate_power(-h - 0.5, sigma - hi, sigma - from, |y| (sigma - y).powf(q), NODES);
    acc
}

/// `∫_0^1 f(g) dg` on dyadic pieces refined towards `g = 0`, stopping once a
/// piece is below rounding at offset `origin`.
fn graded<F: Fn(f64) -> f64>(origin: f64, f: F) -> f64 {
    let floor = 4.0 * f64::EPSILON * origin.max(1.0);
    let mut acc = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..GRADED_LEVELS {
        let lo = 0.5 * hi;
        if lo <= floor {
            break;
        }
        acc += integrate(&f, lo, hi, 8);
        hi = lo;
    }
    acc
}

impl UnitTable {
    fn build(h: HurstParam, n: usize) -> Self {
        let hv = h.value();
        let q = 0.5 - hv;
        let mut offset = vec![0; n];
        let mut table = Vec::with_capacity(n * (n + 1) / 2);
        let r8 = rule(8);
        for k in 0..n {
            offset[k] = table.len();
            if k == 0 {
                // ψ_0(s) = sqrt(2h) s^{h-1/2} on the unit cell; the inner integral is a Beta function
                table.push((2.0 * hv).sqrt() * beta(1.5 - hv, q));
                continue;
            }
            let kf = k as f64;
            for m in 0..=k {
                let mf = m as f64;
                let v = if m + 1 >= k {
                    let (lo, hi_off) = if m == k { (kf, None) } else { (mf, Some(mf + 1.0)) };
                    graded(kf, |g| {
                        let sigma = kf + g;
                        let top = hi_off.unwrap_or(sigma);
                        sigma.powf(hv - 0.5) * inner(hv, sigma, lo, top)
                    })
                } else if m == 0 {
                    integrate(|x| {
                        let sigma = kf + x;
                        sigma.powf(hv - 0.5) * inner(hv, sigma, 0.0, 1.0)
                    }, 0.0, 1.0, 8)
                } else {
                    let dist = (k - m) as f64;
                    let mut acc = 0.0;
                    for (&xi, &wi) in r8.nodes.iter().zip(&r8.weights) {
                        let sigma = kf + xi;
                        let mut row = 0.0;
                        for (&xj, &wj) in r8.nodes.iter().zip(&r8.weights) {
                            let gap = dist + xi - xj;
                            row += wj * (mf + xj).powf(q) * gap.powf(-hv - 0.5);
                        }
                        acc += wi * sigma.powf(hv - 0.5) * row;
                    }
                    acc
                };
                table.push(v);
            }
        }
        Self { offset, table }
    }

    #[inline]
    fn row(&self, k: usize) -> &[f64] {
        &self.table[self.offset[k]..self.offset[k] + k + 1]
    }
}

fn unit_table(h: HurstParam, n: usize) -> Arc<UnitTable> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<UnitTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (h.value().to_bits(), n);
    if let Some(t) = cache.lock().expect("kernel cache poisoned").get(&key) {
        return Arc::clone(t);
    }
    let built = Arc::new(UnitTable::build(h, n));
    let mut guard = cache.lock().expect("kernel cache poisoned");
    Arc::clone(guard.entry(key).or_insert(built))
}

/// Precomputed cell interactions for one `(grid, h)`.
#[derive(Debug, Clone)]
pub struct BelKernel {
    grid: GridSpec,
    h: HurstParam,
    unit: Arc<UnitTable>,
    scale: f64,
    constant: f64,
}

impl BelKernel {
    pub fn new(grid: GridSpec, h: HurstParam) -> Self {
        Self {
            grid,
            h,
            unit: unit_table(h, grid.n_steps()),
            scale: grid.dt().powf(0.5 - h.value()),
            constant: big_c_h(h),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn hurst(&self) -> HurstParam {
        self.h
    }

    /// Physical `M(k, m)`, `m <= k`.
    pub fn interaction(&self, k: usize, m: usize) -> f64 {
        self.unit.row(k)[m] * self.scale
    }

    /// Cell coefficients `G_k`, flat `n * d * d` row-major, for cell averages
    /// `a_cells` of the time weighting.
    pub fn profile(&self, a_cells: &[f64], flow: &FlowPath) -> Result<Vec<f64>> {
        let n = self.grid.n_steps();
        if a_cells.len() != n {
            return Err(Error::Dimension { expected: n, got: a_cells.len() });
        }
        if flow.n_steps() != n {
            return Err(Error::Dimension { expected: n, got: flow.n_steps() });
        }
        let d = flow.dim();
        let m2 = d * d;
        // a_m J̄_m for every cell
        let mut aj = vec![0.0; n * m2];
        for m in 0..n {
            let (j0, j1) = (flow.jac(m), flow.jac(m + 1));
            for e in 0..m2 {
                aj[m * m2 + e] = a_cells[m] * 0.5 * (j0[e] + j1[e]);
            }
        }
        let mut out = vec![0.0; n * m2];
        for k in 0..n {
            let row = self.unit.row(k);
            let dst = &mut out[k * m2..(k + 1) * m2];
            for (m, &w) in row.iter().enumerate() {
                let src = &aj[m * m2..(m + 1) * m2];
                for e in 0..m2 {
                    dst[e] += w * src[e];
                }
            }
            dst.iter_mut().for_each(|v| *v *= self.scale);
        }
        Ok(out)
    }

    /// `π = C Σ_k G_kᵀ dW_k` from a profile.
    pub fn weight_from_profile(&self, profile: &[f64], path: &JointPath) -> Result<Vec<f64>> {
        let n = self.grid.n_steps();
        let d = path.dim();
        if profile.len() != n * d * d {
            return Err(Error::Dimension { expected: n * d * d, got: profile.len() });
        }
        let mut pi = vec![0.0; d];
        for k in 0..n {
            let g = &profile[k * d * d..(k + 1) * d * d];
            for (i, p) in pi.iter_mut().enumerate() {
                for j in 0..d {
                    *p += g[j * d + i] * path.dw(k, j);
                }
            }
            if pi.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { context: "malliavin weight", step: k });
            }
        }
        pi.iter_mut().for_each(|v| *v *= self.constant);
        Ok(pi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_flow_profile_matches_closed_form() {
        // J ≡ 1, a ≡ 1/T: g(s) = B(3/2-h, 1/2-h) s^{1/2-h} / T exactly, so the
        // cell projections have closed forms.
        for &h in &[0.05, 0.1, 0.3] {
            let hp = HurstParam::new(h).unwrap();
            let t = 1.7;
            let grid = GridSpec::new(t, 24).unwrap();
            let k = BelKernel::new(grid, hp);
            let a = vec![1.0 / t; 24];
            let prof = k.profile(&a, &FlowPath::constant(24, 1, 1.0)).unwrap();
            let b = beta(1.5 - h, 0.5 - h) / t;
            let dt = grid.dt();
            let first = b * (2.0 * h).sqrt() * dt.powf(0.5 - h);
            assert!((prof[0] / first - 1.0).abs() < 1e-12, "h={h}");
            for c in 1..24 {
                let e = 1.5 - h;
                let exact = b * (grid.time(c + 1).powf(e) - grid.time(c).powf(e)) / (e * dt);
                assert!((prof[c] / exact - 1.0).abs() < 1e-7, "h={h} cell {c}: {} vs {exact}", prof[c]);
            }
        }
    }

    #[test]
    fn profile_is_linear_in_a_constant_flow() {
        let grid = GridSpec::new(1.0, 12).unwrap();
        let k = BelKernel::new(grid, HurstParam::new(0.1).unwrap());
        let a = vec![1.0; 12];
        let p1 = k.profile(&a, &FlowPath::constant(12, 2, 1.0)).unwrap();
        let p3 = k.profile(&a, &FlowPath::constant(12, 2, 3.0)).unwrap();
        for (x, y) in p1.iter().zip(&p3) {
            assert!((3.0 * x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn zero_increments_give_zero_weight() {
        let grid = GridSpec::new(1.0, 8).unwrap();
        let k = BelKernel::new(grid, HurstParam::new(0.1).unwrap());
        let prof = k.profile(&[1.0; 8], &FlowPath::constant(8, 1, 1.0)).unwrap();
        let pi = k.weight_from_profile(&prof, &JointPath::zero(grid, 1)).unwrap();
        assert_eq!(pi, vec![0.0]);
    }
}
