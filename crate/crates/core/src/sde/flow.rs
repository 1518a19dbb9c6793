use crate::error::{Error, Result};
use crate::sde::{DriftField, StatePath};

/// First-variation matrices `J_k = ∂X_k/∂x`, row-major `d * d` per grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPath {
    jac: Vec<f64>,
    d: usize,
}

impl FlowPath {
    /// `J_k = c I` at every grid time.
    pub fn constant(n_steps: usize, d: usize, c: f64) -> Self {
        let mut jac = vec![0.0; (n_steps + 1) * d * d];
        for k in 0..=n_steps {
            for i in 0..d {
                jac[k * d * d + i * d + i] = c;
            }
        }
        Self { jac, d }
    }

    /// Scalar flow from its values, `d = 1`.
    pub fn from_scalar(values: Vec<f64>) -> Self {
        Self { jac: values, d: 1 }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_steps(&self) -> usize {
        self.jac.len() / (self.d * self.d) - 1
    }

    pub fn jac(&self, k: usize) -> &[f64] {
        let m = self.d * self.d;
        &self.jac[k * m..(k + 1) * m]
    }

    #[inline]
    pub fn entry(&self, k: usize, i: usize, j: usize) -> f64 {
        self.jac[k * self.d * self.d + i * self.d + j]
    }
}

/// `J_{k+1} = (I + Db(t_k, X_k) Δ) J_k`, `J_0 = I`. For `d = 1` every factor
/// must stay positive.
pub fn flow_derivative<F: DriftField + ?Sized>(drift: &F, state: &StatePath<'_>) -> Result<FlowPath> {
    let d = state.dim();
    if let Some(e) = drift.dim() {
        if e != d {
            return Err(Error::Dimension { expected: e, got: d });
        }
    }
    let grid = state.path().grid();
    let n = grid.n_steps();
    let dt = grid.dt();
    let m = d * d;
    let mut flow = FlowPath::constant(n, d, 1.0);
    let mut db = vec![0.0; m];
    for k in 0..n {
        drift.jacobian(grid.time(k), state.state(k), &mut db);
        let (done, rest) = flow.jac.split_at_mut((k + 1) * m);
        let cur = &done[k * m..];
        let next = &mut rest[..m];
        if d == 1 {
            let factor = 1.0 + db[0] * dt;
            if !(factor > 0.0) {
                return Err(Error::FlowSign { step: k, factor });
            }
            next[0] = factor * cur[0];
        } else {
            for i in 0..d {
                for j in 0..d {
                    let mut v = cur[i * d + j];
                    for p in 0..d {
                        v += db[i * d + p] * cur[p * d + j] * dt;
                    }
                    next[i * d + j] = v;
                }
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "flow", step: k + 1 });
        }
    }
    Ok(flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{GridSpec, JointPath, PathSeed, VolterraWeights};
    use crate::frac::HurstParam;
    use crate::sde::{euler_solve, mollify, DriftSpec};

    #[test]
    fn zero_drift_flow_is_identity() {
        let w = VolterraWeights::new(GridSpec::new(1.0, 16).unwrap(), HurstParam::new(0.1).unwrap());
        let p = w.sample(3, PathSeed::new(0, 0)).unwrap();
        let m = mollify(DriftSpec::Zero, 0.1).unwrap();
        let s = euler_solve(&m, &[0.0; 3], &p).unwrap();
        assert_eq!(flow_derivative(&m, &s).unwrap(), FlowPath::constant(16, 3, 1.0));
    }

    #[test]
    fn linear_flow_is_compound_growth() {
        let g = GridSpec::new(1.0, 1024).unwrap();
        let p = JointPath::zero(g, 1);
        let m = mollify(DriftSpec::Linear { lambda: 0.5 }, 1.0).unwrap();
        let s = euler_solve(&m, &[1.0], &p).unwrap();
        let f = flow_derivative(&m, &s).unwrap();
        let jt = f.entry(1024, 0, 0);
        assert!((jt - (1.0 + 0.5 / 1024.0f64).powi(1024)).abs() < 1e-12);
        assert!((jt / 0.5f64.exp() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn sign_loss_is_reported() {
        let g = GridSpec::new(1.0, 4).unwrap();
        let p = JointPath::zero(g, 1);
        let m = mollify(DriftSpec::Linear { lambda: -8.0 }, 1.0).unwrap();
        let s = euler_solve(&m, &[1.0], &p).unwrap();
        assert!(matches!(flow_derivative(&m, &s), Err(Error::FlowSign { step: 0, .. })));
    }
}
