//! Fractional calculus: kernel, covariance and Riemann–Liouville operators.

mod hurst;
mod kernel;
mod rl;
mod sampled;
mod shuffle;

pub use hurst::{continuous_threshold, strong_threshold, HurstParam};
pub use kernel::{big_c_h, c_h, cov_rh, kernel_covariance, kernel_kh, VolterraKernel};
pub use rl::{frac_deriv_left, frac_int_left, kh_inverse_ac, kh_inverse_constant, kh_inverse_scale, UniformFracIntegral, UniformKhInverse};
pub use sampled::{FracOrder, SampledFunction};
pub use shuffle::shuffle_check;
