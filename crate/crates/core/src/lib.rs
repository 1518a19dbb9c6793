//! Malliavin-weight deltas for SDEs with singular drift driven by rough
//! fractional Brownian motion.

pub mod bel;
pub mod error;
pub mod fbm;
pub mod fd;
pub mod frac;
pub mod girsanov;
pub mod quadrature;
pub mod report;
pub mod rough_vol;
pub mod sde;
pub mod special;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fbm.md")]
    mod fbm {}
    #[doc = include_str!("../../../book/src/fractional-calculus.md")]
    mod fractional_calculus {}
    #[doc = include_str!("../../../book/src/sde-flow.md")]
    mod sde_flow {}
    #[doc = include_str!("../../../book/src/malliavin-weight.md")]
    mod malliavin_weight {}
    #[doc = include_str!("../../../book/src/finite-differences.md")]
    mod finite_differences {}
    #[doc = include_str!("../../../book/src/girsanov.md")]
    mod girsanov {}
    #[doc = include_str!("../../../book/src/rough-volatility.md")]
    mod rough_volatility {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
