//! Runs the configured checks over an ensemble and assembles the report.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{CheckSpec, RunConfig};
use crate::engine::{run_ensemble_with, EnsembleConfig, RunControl, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::estimators::{
    bracket_check, clt_check, doob_check, drift_fit_check, escape_exponent_check, lln_check,
    rd_norm_direction, transience_check, upper_bound_check, CheckEntry, DriftFit, FitOptions,
};
use crate::estimators::drift_fit::DEFAULT_MIN_TRANSITIONS;
use crate::models::ModelSpec;
use crate::theory::{applicability_for, lambda_const, DriftParams, TheoremApplicability};

pub const LLN_TOL: f64 = 0.05;
pub const CLT_STD_TOL: f64 = 0.10;
pub const KS_PVALUE_FLOOR: f64 = 1e-3;
pub const EXPONENT_TOL: f64 = 0.03;
pub const QUORUM: f64 = 0.99;
pub const BRACKET_SLACK: f64 = 0.1;
pub const UPPER_EPS: f64 = 0.5;
pub const DOOB_FACTOR: f64 = 0.1;
pub const DOOB_QUORUM: f64 = 0.95;
pub const FIT_BETA_TOL: f64 = 0.05;
pub const FIT_RHO_TOL: f64 = 0.10;
/// Lower fit window for the vector walk, where the norm drift has not yet
/// settled onto its power law near the origin.
pub const RD_FIT_X_MIN: f64 = 100.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub config_hash: String,
    pub model: ModelSpec,
    pub engine: EnsembleConfig,
    pub applicability: TheoremApplicability,
    /// Limit constant of the scaled process, when the drift has one.
    pub predicted_lambda: Option<f64>,
    pub checks: Vec<CheckEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_fit: Option<DriftFit>,
    pub all_pass: bool,
    pub wall_time_s: f64,
}

/// Drift parameters of a model in the form the limit theory takes them.
pub fn drift_params(model: &ModelSpec) -> Result<DriftParams> {
    let (a, a_upper) = model.drift_bounds();
    match model {
        ModelSpec::Osc(p) => DriftParams::new(p.beta, p.a, p.a, p.a_upper),
        _ => DriftParams::new(model.beta(), model.rho().unwrap_or(0.0), a, a_upper),
    }
}

/// Simulates the ensemble described by `cfg` and runs its checks.
pub fn verify(cfg: &RunConfig, ctrl: &RunControl) -> Result<VerificationReport> {
    let start = Instant::now();
    let engine = cfg.effective_engine();
    let records = run_ensemble_with(&cfg.model, &engine, ctrl)?;
    let mut report = evaluate(cfg, &records)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs the checks of `cfg` against existing records. A failing check input
/// becomes an errored entry; the remaining checks still run.
pub fn evaluate(cfg: &RunConfig, records: &[TrajectoryRecord]) -> Result<VerificationReport> {
    let model = &cfg.model;
    let beta = model.beta();
    let checks = cfg.effective_checks();
    let drift = || drift_params(model);
    let predicted_lambda = match model {
        ModelSpec::Osc(_) => None,
        m => m.rho().and_then(|r| lambda_const(r, beta).ok()),
    };

    let mut entries = Vec::new();
    let mut fit: Option<DriftFit> = None;

    // The fit runs first so a fitted variance can stand in for a missing one.
    for spec in checks.iter().filter(|c| matches!(c, CheckSpec::DriftFit { .. })) {
        let CheckSpec::DriftFit {
            x_min,
            x_max,
            beta_tolerance,
            rho_tolerance,
            min_transitions,
        } = *spec
        else {
            unreachable!()
        };
        let rd = matches!(model, ModelSpec::Rd(_));
        let opts = FitOptions {
            x_min: x_min.unwrap_or(if rd { RD_FIT_X_MIN } else { 1.0 }),
            x_max: x_max.unwrap_or(f64::INFINITY),
            min_transitions: min_transitions.unwrap_or(DEFAULT_MIN_TRANSITIONS),
        };
        let rho_tol = if rd { rho_tolerance } else { Some(rho_tolerance.unwrap_or(FIT_RHO_TOL)) };
        let rho = model.rho().unwrap_or(f64::NAN);
        match drift_fit_check(records, beta, rho, &opts, beta_tolerance.unwrap_or(FIT_BETA_TOL), rho_tol) {
            Ok((e, f)) => {
                entries.push(e);
                fit = Some(f);
            }
            Err(err) => entries.push(CheckEntry::errored("drift_fit", &err)),
        }
    }

    for spec in &checks {
        let name = spec.name();
        let result: Result<Vec<CheckEntry>> = match *spec {
            CheckSpec::DriftFit { .. } => continue,
            CheckSpec::Lln { tolerance } => drift()
                .and_then(|d| lln_check(records, &d, tolerance.unwrap_or(LLN_TOL)))
                .map(|e| vec![e]),
            CheckSpec::Clt {
                std_tolerance,
                ks_pvalue_floor,
                sigma2,
            } => {
                let s2 = sigma2
                    .or_else(|| model.sigma2())
                    .or_else(|| fit.as_ref().map(|f| f.sigma2_hat))
                    .ok_or_else(|| {
                        Error::Unsupported(
                            "no increment variance: set checks[].sigma2 or add a drift_fit check".into(),
                        )
                    });
                drift()
                    .and_then(|d| {
                        clt_check(
                            records,
                            &d,
                            s2?,
                            std_tolerance.unwrap_or(CLT_STD_TOL),
                            ks_pvalue_floor.unwrap_or(KS_PVALUE_FLOOR),
                        )
                    })
                    .map(|e| vec![e])
            }
            CheckSpec::EscapeExponent { tolerance } => {
                escape_exponent_check(records, beta, tolerance.unwrap_or(EXPONENT_TOL)).map(|e| vec![e])
            }
            CheckSpec::Bracket { slack, quorum } => {
                let (a, a_upper) = model.drift_bounds();
                bracket_check(
                    records,
                    a,
                    a_upper,
                    beta,
                    slack.unwrap_or(BRACKET_SLACK),
                    quorum.unwrap_or(QUORUM),
                )
                .map(|e| vec![e])
            }
            CheckSpec::UpperBound { eps, quorum } => {
                upper_bound_check(records, beta, eps.unwrap_or(UPPER_EPS), quorum.unwrap_or(QUORUM))
                    .map(|e| vec![e])
            }
            CheckSpec::Transience { level, quorum } => {
                transience_check(records, beta, level, quorum.unwrap_or(QUORUM)).map(|e| vec![e])
            }
            CheckSpec::Doob { factor, quorum } => {
                let (a, _) = model.drift_bounds();
                doob_check(
                    records,
                    beta,
                    a,
                    factor.unwrap_or(DOOB_FACTOR),
                    quorum.unwrap_or(DOOB_QUORUM),
                )
                .map(|e| vec![e])
            }
            CheckSpec::RdNormDirection { tolerance } => drift()
                .and_then(|d| rd_norm_direction(records, &d, tolerance.unwrap_or(LLN_TOL))),
        };
        match result {
            Ok(es) => entries.extend(es),
            Err(err) => entries.push(CheckEntry::errored(name, &err)),
        }
    }

    // Informational entries (direction diagnostics) carry a note and do not
    // gate the verdict.
    let all_pass = !entries.is_empty()
        && entries
            .iter()
            .filter(|e| e.name != "rd_direction")
            .all(|e| e.pass && e.error.is_none());

    Ok(VerificationReport {
        version: crate::VERSION.to_string(),
        config_hash: cfg.hash(),
        model: *model,
        engine: cfg.effective_engine(),
        applicability: applicability_for(model.increment_gamma(), beta),
        predicted_lambda,
        checks: entries,
        drift_fit: fit,
        all_pass,
        wall_time_s: 0.0,
    })
}

impl VerificationReport {
    /// One line per check: verdict, name, prediction and estimate.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.error.is_some() {
                "ERROR"
            } else if c.name == "rd_direction" {
                "INFO"
            } else if c.pass {
                "PASS"
            } else {
                "FAIL"
            };
            out.push_str(&format!("{verdict:<5} {:<18}", c.name));
            if let Some(p) = c.predicted {
                out.push_str(&format!(" predicted={p:.6}"));
            }
            if let Some(e) = &c.estimated {
                out.push_str(&format!(" estimated={:.6} (se {:.2e})", e.point, e.stderr));
            }
            if let Some(t) = c.tolerance {
                out.push_str(&format!(" tol={t:.4}"));
            }
            if let Some(p) = c.pvalue {
                out.push_str(&format!(" p={p:.4}"));
            }
            if let Some(err) = &c.error {
                out.push_str(&format!(" error: {err}"));
            }
            out.push('\n');
        }
        out.push_str(if self.all_pass { "all checks passed\n" } else { "some checks failed\n" });
        out
    }
}
