// Negated comparisons like `!(v > 0.0)` are used throughout argument
// validation because they reject NaN, which `v <= 0.0` silently admits.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Extreme-value numerics for locally stationary Gaussian processes with
//! non-constant variance: closed-form tail asymptotics, Monte Carlo
//! estimation of Pickands constants, exact path simulation, and empirical
//! exceedance diagnostics.

pub mod asympt;
pub mod error;
pub mod grid;
pub mod model;
pub mod pickands;
pub mod profile;
pub mod raretail;
pub mod rng;
pub mod sampler;
pub mod specfun;

pub use error::{Error, Result};

// Re-exported because covariance constructors take nalgebra matrices.
pub use nalgebra;

/// Library version, embedded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
