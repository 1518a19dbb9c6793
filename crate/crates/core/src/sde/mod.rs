//! Drift fields, the Euler solver and the first-variation flow.

mod drift;
mod euler;
mod flow;

pub use drift::{default_epsilon, mollify, DriftField, DriftSpec, MollifiedDrift};
pub use euler::{euler_solve, euler_solve_with, StatePath};
pub use flow::{flow_derivative, FlowPath};
