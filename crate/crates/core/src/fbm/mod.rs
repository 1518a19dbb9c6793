//! Joint Wiener/fBm path sampling, an exact reference sampler and covariance diagnostics.

mod cholesky;
mod covariance;
mod grid;
mod seed;
mod volterra;

pub use cholesky::{cholesky_in_place, sample_cholesky, CholeskySampler, MAX_CHOLESKY_STEPS};
pub use covariance::{covariance_report, write_paths_csv, CovarianceReport};
pub use grid::GridSpec;
pub use seed::{PathSeed, Stream};
pub use volterra::{sample_joint_path, JointPath, VolterraWeights};
