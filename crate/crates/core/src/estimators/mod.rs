//! Statistical verification of the limit laws from ensemble output.

pub mod checks;
pub mod drift_fit;
pub mod ks;
pub mod stats;

pub use checks::{
    bracket_check, clt_check, doob_check, drift_fit_check, escape_exponent,
    escape_exponent_check, lln_check, merged_transitions, rd_norm_direction, transience_check,
    upper_bound_check, CheckEntry, ExponentEstimate,
};
pub use drift_fit::{drift_fit, write_bins_csv, BinStat, DriftFit, FitOptions};
pub use ks::{ks_test, normal_cdf, KsResult};
pub use stats::EstimateCI;
