//! Monte Carlo laboratory for processes on the half-line whose drift vanishes
//! like `x^-beta` with `0 <= beta < 1`.
//!
//! The crate simulates ensembles of such processes deterministically and
//! checks the escape-rate laws they obey: transience, almost-sure growth
//! bounds of order `t^(1/(1+beta))`, the strong law
//! `X_t / t^(1/(1+beta)) -> lambda(rho, beta)` and the Gaussian fluctuations
//! around it.

pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod models;
pub mod report;
pub mod theory;

pub use error::{Error, Result};

/// Version string embedded in reports and manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
