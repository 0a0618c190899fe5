//! Finite-ensemble surrogates for the almost-sure and distributional limit
//! laws.
//!
//! Almost-sure statements are checked as quorum statements: a required
//! fraction of trajectories must satisfy the property at the recorded times.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::estimators::drift_fit::{drift_fit, DriftFit, FitOptions};
use crate::estimators::ks::{ks_test, normal_cdf};
use crate::estimators::stats::{mean_var, ols, quantile, EstimateCI};
use crate::theory::{clt_std, lambda_const, DriftParams};
use crate::engine::TransitionBins;

pub const LLN_MIN_TRAJ: usize = 100;
pub const CLT_MIN_TRAJ: usize = 1000;
pub const EXPONENT_MIN_POINTS: usize = 10;

/// One verification outcome. `pass` is a pure function of the other fields
/// as documented on each check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub predicted: Option<f64>,
    pub estimated: Option<EstimateCI>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub pvalue: Option<f64>,
    pub details: BTreeMap<String, f64>,
    pub note: Option<String>,
    pub error: Option<String>,
}

impl CheckEntry {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            predicted: None,
            estimated: None,
            tolerance: None,
            pass: false,
            pvalue: None,
            details: BTreeMap::new(),
            note: None,
            error: None,
        }
    }

    /// Entry for a check that could not be evaluated.
    pub fn errored(name: &str, err: &Error) -> Self {
        let mut e = Self::new(name);
        e.error = Some(err.to_string());
        e
    }

    fn detail(&mut self, key: &str, v: f64) {
        // JSON has no NaN; drop non-finite diagnostics.
        if v.is_finite() {
            self.details.insert(key.to_string(), v);
        }
    }
}

fn horizon(records: &[TrajectoryRecord]) -> Result<u64> {
    let t = records
        .first()
        .ok_or(Error::InsufficientData {
            what: "trajectories",
            needed: 1,
            got: 0,
        })?
        .final_sample()
        .t;
    if records.iter().any(|r| r.final_sample().t != t) {
        return Err(Error::Unsupported("records do not share a horizon".into()));
    }
    Ok(t)
}

fn need(what: &'static str, needed: usize, got: usize) -> Result<()> {
    if got < needed {
        return Err(Error::InsufficientData { what, needed, got });
    }
    Ok(())
}

fn scaled_finals(records: &[TrajectoryRecord], beta: f64) -> Result<Vec<f64>> {
    let t = horizon(records)? as f64;
    let scale = t.powf(1.0 / (1.0 + beta));
    Ok(records.iter().map(|r| r.final_sample().x / scale).collect())
}

/// Strong law: mean of `X_T / T^(1/(1+beta))` against `lambda(rho, beta)`.
/// Passes iff the relative error is at most `rel_tol`.
pub fn lln_check(records: &[TrajectoryRecord], d: &DriftParams, rel_tol: f64) -> Result<CheckEntry> {
    need("law of large numbers", LLN_MIN_TRAJ, records.len())?;
    let ratios = scaled_finals(records, d.beta)?;
    let lambda = lambda_const(d.rho, d.beta)?;
    let est = EstimateCI::mean_of(&ratios);
    let rel = (est.point - lambda).abs() / lambda;

    let mut e = CheckEntry::new("lln");
    e.predicted = Some(lambda);
    e.estimated = Some(est);
    e.tolerance = Some(rel_tol);
    e.pass = rel <= rel_tol;
    e.detail("relative_error", rel);
    Ok(e)
}

/// Central limit theorem: `z = (X_T - lambda T^(1/(1+beta))) / sqrt(T)`.
/// Passes iff the sample standard deviation is within `std_rel_tol` of
/// [`clt_std`] and the KS p-value against `N(0, clt_std^2)` exceeds `p_floor`.
pub fn clt_check(
    records: &[TrajectoryRecord],
    d: &DriftParams,
    sigma2: f64,
    std_rel_tol: f64,
    p_floor: f64,
) -> Result<CheckEntry> {
    if d.beta == 0.0 {
        return Err(Error::domain(
            "beta",
            0.0,
            "central limit theorem requires beta in (0, 1)",
        ));
    }
    need("central limit theorem", CLT_MIN_TRAJ, records.len())?;
    let t = horizon(records)? as f64;
    let lambda = lambda_const(d.rho, d.beta)?;
    let center = lambda * t.powf(1.0 / (1.0 + d.beta));
    let z: Vec<f64> = records
        .iter()
        .map(|r| (r.final_sample().x - center) / t.sqrt())
        .collect();
    let predicted = clt_std(sigma2.sqrt(), d.beta)?;
    let (mean, var) = mean_var(&z);
    let sd = var.sqrt();
    let n = z.len();
    let ks = ks_test(&z, |v| normal_cdf(v, 0.0, predicted))?;
    let std_ok = (sd / predicted - 1.0).abs() <= std_rel_tol;
    let ks_ok = ks.pvalue > p_floor;

    let mut e = CheckEntry::new("clt");
    e.predicted = Some(predicted);
    e.estimated = Some(EstimateCI::new(sd, sd / (2.0 * (n as f64 - 1.0)).sqrt(), n));
    e.tolerance = Some(std_rel_tol);
    e.pvalue = Some(ks.pvalue);
    e.pass = std_ok && ks_ok;
    e.detail("sigma2", sigma2);
    e.detail("z_mean", mean);
    e.detail("ks_statistic", ks.statistic);
    e.detail("ks_pvalue_floor", p_floor);
    e.detail("std_within_tolerance", std_ok as u8 as f64);
    e.detail("ks_pass", ks_ok as u8 as f64);
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub slope: EstimateCI,
    pub skipped: usize,
    pub points: usize,
}

/// Per-trajectory least-squares slope of `ln X_t` on `ln t` over grid times
/// `t >= sqrt(T)`; trajectories touching zero inside the window are skipped.
pub fn escape_exponent(records: &[TrajectoryRecord]) -> Result<ExponentEstimate> {
    let t_max = horizon(records)? as f64;
    let burn_in = t_max.sqrt();
    let times: Vec<f64> = records[0]
        .samples
        .iter()
        .filter(|s| s.t as f64 >= burn_in)
        .map(|s| s.t as f64)
        .collect();
    need("escape exponent grid points", EXPONENT_MIN_POINTS, times.len())?;
    let log_t: Vec<f64> = times.iter().map(|t| t.ln()).collect();

    let mut slopes = Vec::with_capacity(records.len());
    let mut skipped = 0;
    for r in records {
        let xs: Vec<f64> = r
            .samples
            .iter()
            .filter(|s| s.t as f64 >= burn_in)
            .map(|s| s.x)
            .collect();
        if xs.iter().any(|&x| x <= 0.0) {
            skipped += 1;
            continue;
        }
        let log_x: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        slopes.push(ols(&log_t, &log_x).0);
    }
    need("escape exponent trajectories", 1, slopes.len())?;
    Ok(ExponentEstimate {
        slope: EstimateCI::mean_of(&slopes),
        skipped,
        points: times.len(),
    })
}

/// Passes iff the mean slope is within `tol` of `1/(1+beta)` and at most 1%
/// of trajectories were skipped.
pub fn escape_exponent_check(records: &[TrajectoryRecord], beta: f64, tol: f64) -> Result<CheckEntry> {
    let est = escape_exponent(records)?;
    let predicted = 1.0 / (1.0 + beta);
    let skipped_frac = est.skipped as f64 / records.len() as f64;
    let mut e = CheckEntry::new("escape_exponent");
    e.predicted = Some(predicted);
    e.estimated = Some(est.slope);
    e.tolerance = Some(tol);
    e.pass = (est.slope.point - predicted).abs() <= tol && skipped_frac <= 0.01;
    e.detail("skipped_fraction", skipped_frac);
    e.detail("grid_points", est.points as f64);
    Ok(e)
}

/// Fraction of `(trajectory, t)` samples with `t >= T/10` whose ratio
/// `X_t / t^(1/(1+beta))` lies in `[lambda(a) - slack, lambda(A) + slack]`.
/// Passes iff the fraction is at least `quorum`.
pub fn bracket_check(
    records: &[TrajectoryRecord],
    a: f64,
    a_upper: f64,
    beta: f64,
    slack: f64,
    quorum: f64,
) -> Result<CheckEntry> {
    let t_max = horizon(records)?;
    let lo = lambda_const(a, beta)? - slack;
    let hi = lambda_const(a_upper, beta)? + slack;
    let p = 1.0 / (1.0 + beta);
    let mut ratios = Vec::new();
    let (mut inside, mut total) = (0u64, 0u64);
    for r in records {
        for s in r.samples.iter().filter(|s| s.t * 10 >= t_max) {
            let ratio = s.x / (s.t as f64).powf(p);
            ratios.push(ratio);
            total += 1;
            inside += (ratio >= lo && ratio <= hi) as u64;
        }
    }
    need("bracket samples", 1, total as usize)?;
    let frac = inside as f64 / total as f64;
    let mut e = CheckEntry::new("bracket");
    e.predicted = Some(quorum);
    e.estimated = Some(EstimateCI::new(frac, (frac * (1.0 - frac) / total as f64).sqrt(), total as usize));
    e.tolerance = Some(slack);
    e.pass = frac >= quorum;
    e.detail("band_lo", lo);
    e.detail("band_hi", hi);
    e.detail("ratio_min", ratios.iter().cloned().fold(f64::INFINITY, f64::min));
    e.detail("ratio_max", ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(e)
}

/// Grid times below this are not tested against the crude upper bound.
pub const UPPER_BOUND_T_MIN: u64 = 1000;

pub fn crude_upper_bound(t: f64, beta: f64, eps: f64) -> f64 {
    let p = 1.0 / (1.0 + beta);
    t.powf(p) * t.ln().powf(p + eps)
}

/// Fraction of trajectories with `running_max(t) <= t^p (ln t)^(p + eps)`,
/// `p = 1/(1+beta)`, at every grid time `t >= 1000`. Passes iff at least
/// `quorum`.
pub fn upper_bound_check(records: &[TrajectoryRecord], beta: f64, eps: f64, quorum: f64) -> Result<CheckEntry> {
    if !(eps > 0.0) {
        return Err(Error::domain("eps", eps, "must be positive"));
    }
    need("upper bound trajectories", 1, records.len())?;
    let mut clean = 0usize;
    let mut tested_points = 0usize;
    let mut worst = 0.0f64;
    for r in records {
        let mut ok = true;
        for s in r.samples.iter().filter(|s| s.t >= UPPER_BOUND_T_MIN) {
            tested_points += 1;
            let ratio = s.running_max / crude_upper_bound(s.t as f64, beta, eps);
            worst = worst.max(ratio);
            ok &= ratio <= 1.0;
        }
        clean += ok as usize;
    }
    let n = records.len();
    let frac = clean as f64 / n as f64;
    let mut e = CheckEntry::new("upper_bound");
    e.predicted = Some(quorum);
    e.estimated = Some(EstimateCI::new(frac, (frac * (1.0 - frac) / n as f64).sqrt(), n));
    e.tolerance = Some(eps);
    e.pass = frac >= quorum;
    e.detail("max_ratio_to_bound", worst);
    e.detail("tested_points", tested_points as f64);
    if tested_points == 0 {
        e.note = Some("no grid time at or above 1000; bound untested".into());
    }
    Ok(e)
}

/// Reports (a) the fraction of trajectories whose last visit to 0 precedes
/// `T/2` and (b) the fraction whose minimum over grid times `t >= T/2`
/// exceeds `level` (default `T^(1/(2(1+beta)))`). Passes iff both reach `quorum`.
pub fn transience_check(
    records: &[TrajectoryRecord],
    beta: f64,
    level: Option<f64>,
    quorum: f64,
) -> Result<CheckEntry> {
    let t_max = horizon(records)?;
    let level = level.unwrap_or_else(|| (t_max as f64).powf(1.0 / (2.0 * (1.0 + beta))));
    if !(level >= 1.0) {
        return Err(Error::domain("level", level, "must be at least 1"));
    }
    let n = records.len();
    let half = t_max / 2;
    let no_return = records
        .iter()
        .filter(|r| r.last_hit_zero < half as i64)
        .count();
    let above = records
        .iter()
        .filter(|r| {
            r.samples
                .iter()
                .filter(|s| s.t >= half)
                .all(|s| s.x > level)
        })
        .count();
    let fa = no_return as f64 / n as f64;
    let fb = above as f64 / n as f64;
    let worst = fa.min(fb);
    let mut e = CheckEntry::new("transience");
    e.predicted = Some(quorum);
    e.estimated = Some(EstimateCI::new(worst, (worst * (1.0 - worst) / n as f64).sqrt(), n));
    e.tolerance = Some(level);
    e.pass = fa >= quorum && fb >= quorum;
    e.detail("fraction_no_zero_after_half", fa);
    e.detail("fraction_min_above_level", fb);
    e.detail("level", level);
    Ok(e)
}

/// Doob decomposition of `Y = X^(1+beta)`: passes iff at least `quorum` of
/// trajectories have gap `|Y_T - A_T| / T <= factor * rho (1+beta)`.
/// Also fits the decay slope of the ensemble-mean gap over `t >= sqrt(T)`.
pub fn doob_check(
    records: &[TrajectoryRecord],
    beta: f64,
    rho: f64,
    factor: f64,
    quorum: f64,
) -> Result<CheckEntry> {
    let t_max = horizon(records)?;
    let doob: Vec<_> = records
        .iter()
        .map(|r| r.doob.as_ref())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Unsupported("records carry no Doob data (enable engine.record_doob)".into()))?;
    let threshold = factor * rho * (1.0 + beta);
    let n = records.len();
    let finals: Vec<f64> = doob.iter().map(|d| d.last().map_or(f64::NAN, |s| s.gap)).collect();
    let within = finals.iter().filter(|&&g| g <= threshold).count();
    let frac = within as f64 / n as f64;

    let grid_len = doob[0].len();
    let burn_in = (t_max as f64).sqrt();
    let (mut lt, mut lg) = (Vec::new(), Vec::new());
    for k in 0..grid_len {
        let t = doob[0][k].t;
        if (t as f64) < burn_in {
            continue;
        }
        let mean_gap = doob.iter().map(|d| d[k].gap).sum::<f64>() / n as f64;
        if mean_gap > 0.0 {
            lt.push((t as f64).ln());
            lg.push(mean_gap.ln());
        }
    }
    let slope = if lt.len() >= 2 { ols(&lt, &lg).0 } else { f64::NAN };
    let drift_final: Vec<f64> = doob.iter().map(|d| d.last().map_or(f64::NAN, |s| s.drift_y)).collect();
    let drift_mean = mean_var(&drift_final).0;

    let mut e = CheckEntry::new("doob");
    e.predicted = Some(quorum);
    e.estimated = Some(EstimateCI::new(frac, (frac * (1.0 - frac) / n as f64).sqrt(), n));
    e.tolerance = Some(threshold);
    e.pass = frac >= quorum;
    e.detail("gap_threshold", threshold);
    e.detail("gap_median", quantile(&finals, 0.5));
    e.detail("gap_q95", quantile(&finals, 0.95));
    e.detail("gap_decay_slope", slope);
    e.detail("expected_gap_decay_slope", -(1.0 - beta) / (2.0 + 2.0 * beta));
    e.detail("drift_y_mean_at_horizon", drift_mean);
    e.detail("drift_y_limit", rho * (1.0 + beta));
    Ok(e)
}

/// Merges per-trajectory transition bins in `traj_id` order.
pub fn merged_transitions(records: &[TrajectoryRecord]) -> Result<TransitionBins> {
    let mut it = records.iter().map(|r| r.transitions.as_ref());
    let first = it
        .next()
        .flatten()
        .ok_or_else(|| Error::Unsupported("records carry no transitions (enable engine.record_transitions)".into()))?;
    let mut acc = first.clone();
    for b in it {
        let b = b.ok_or_else(|| Error::Unsupported("some records lack transitions".into()))?;
        acc.merge(b);
    }
    Ok(acc)
}

/// Fits the drift law from recorded transitions. Passes iff `beta_hat` is
/// within `beta_tol` of `beta` and, when `rho_rel_tol` is set, `rho_hat` is
/// within that relative tolerance of `rho`.
pub fn drift_fit_check(
    records: &[TrajectoryRecord],
    beta: f64,
    rho: f64,
    opts: &FitOptions,
    beta_tol: f64,
    rho_rel_tol: Option<f64>,
) -> Result<(CheckEntry, DriftFit)> {
    let bins = merged_transitions(records)?;
    let fit = drift_fit(&bins, opts)?;
    let beta_ok = (fit.beta_hat - beta).abs() <= beta_tol;
    let rho_err = (fit.rho_hat - rho).abs() / rho;
    let rho_ok = rho_rel_tol.map_or(true, |tol| rho_err <= tol);
    let mut e = CheckEntry::new("drift_fit");
    e.predicted = Some(beta);
    e.estimated = Some(EstimateCI::new(fit.beta_hat, fit.beta_stderr, fit.bins_used));
    e.tolerance = Some(beta_tol);
    e.pass = beta_ok && rho_ok;
    e.detail("rho", rho);
    e.detail("rho_hat", fit.rho_hat);
    e.detail("rho_stderr", fit.rho_stderr);
    e.detail("rho_relative_error", rho_err);
    if let Some(t) = rho_rel_tol {
        e.detail("rho_rel_tol", t);
    }
    e.detail("sigma2_hat", fit.sigma2_hat);
    e.detail("sigma2_stderr", fit.sigma2_stderr);
    e.detail("transitions", fit.transitions as f64);
    Ok((e, fit))
}

/// Norm strong law for vector walks plus the spread of the direction between
/// `T/2` and `T`. The direction entry is informational and always passes.
pub fn rd_norm_direction(records: &[TrajectoryRecord], d: &DriftParams, rel_tol: f64) -> Result<Vec<CheckEntry>> {
    let mut norm = lln_check(records, d, rel_tol)?;
    norm.name = "rd_norm_lln".into();

    let moves: Vec<f64> = records
        .iter()
        .map(|r| {
            r.directions
                .as_ref()
                .map(|s| s.mid.iter().zip(&s.end).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        })
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Unsupported("records carry no direction snapshots".into()))?;
    let mut dir = CheckEntry::new("rd_direction");
    dir.estimated = Some(EstimateCI::mean_of(&moves));
    dir.pass = true;
    dir.detail("direction_change_q95", quantile(&moves, 0.95));
    dir.detail("direction_change_median", quantile(&moves, 0.5));
    dir.note = Some("informational: |u(T) - u(T/2)| for the unit direction u".into());
    Ok(vec![norm, dir])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{geometric_grid, DoobSample, Sample};

    fn synthetic(values: impl Fn(u64, u64) -> f64, n: usize, t_max: u64, m: usize) -> Vec<TrajectoryRecord> {
        let grid = geometric_grid(t_max, m);
        (0..n as u64)
            .map(|id| {
                let mut max = 0.0f64;
                let samples = grid
                    .iter()
                    .map(|&t| {
                        let x = values(id, t);
                        max = max.max(x);
                        Sample { t, x, running_max: max }
                    })
                    .collect();
                TrajectoryRecord {
                    traj_id: id,
                    samples,
                    doob: None,
                    last_hit_zero: 0,
                    transitions: None,
                    directions: None,
                    path: None,
                }
            })
            .collect()
    }

    fn drift(beta: f64, rho: f64) -> DriftParams {
        DriftParams::exact(beta, rho).unwrap()
    }

    #[test]
    fn lln_identity_fixture() {
        let lambda = lambda_const(0.5, 0.5).unwrap();
        let recs = synthetic(|_, t| lambda * (t as f64).powf(2.0 / 3.0), 200, 1_000_000, 30);
        let e = lln_check(&recs, &drift(0.5, 0.5), 0.05).unwrap();
        assert!(e.pass);
        assert!((e.estimated.unwrap().point - lambda).abs() < 1e-12);
        assert!(lln_check(&recs[..99], &drift(0.5, 0.5), 0.05).is_err());
    }

    #[test]
    fn lln_permutation_invariant() {
        let recs = synthetic(|id, t| (1.0 + (id % 7) as f64 * 0.01) * (t as f64).powf(2.0 / 3.0), 300, 10_000, 10);
        let mut perm = recs.clone();
        perm.reverse();
        for (i, r) in perm.iter_mut().enumerate() {
            r.traj_id = i as u64;
        }
        let a = lln_check(&recs, &drift(0.5, 0.5), 0.05).unwrap();
        let b = lln_check(&perm, &drift(0.5, 0.5), 0.05).unwrap();
        assert!((a.estimated.unwrap().point - b.estimated.unwrap().point).abs() < 1e-12);
        assert_eq!(a.pass, b.pass);
    }

    #[test]
    fn exponent_identity_fixture() {
        let recs = synthetic(|id, t| (1.0 + id as f64) * (t as f64).powf(0.7), 20, 1_000_000, 40);
        let est = escape_exponent(&recs).unwrap();
        assert!((est.slope.point - 0.7).abs() < 1e-12);
        assert_eq!(est.skipped, 0);
        let e = escape_exponent_check(&recs, 0.5, 0.03).unwrap();
        assert!(!e.pass);

        let flat = synthetic(|_, t| t as f64, 5, 1_000_000, 40);
        assert!((escape_exponent(&flat).unwrap().slope.point - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_skips_zero_paths_and_needs_points() {
        let recs = synthetic(|id, t| if id == 0 && t > 5000 { 0.0 } else { (t as f64).powf(2.0 / 3.0) }, 50, 1_000_000, 40);
        let e = escape_exponent_check(&recs, 0.5, 0.03).unwrap();
        assert!(!e.pass, "2% skipped must fail");
        assert_eq!(e.details["skipped_fraction"], 0.02);
        let sparse = synthetic(|_, t| t as f64, 5, 1_000_000, 6);
        assert!(matches!(escape_exponent(&sparse), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn bracket_fixtures() {
        let recs = synthetic(|_, t| 0.8 * (t as f64).powf(2.0 / 3.0), 10, 100_000, 20);
        let e = bracket_check(&recs, 0.3, 0.7, 0.5, 0.1, 0.99).unwrap();
        assert!(e.pass);
        assert_eq!(e.estimated.unwrap().point, 1.0);
        assert!((e.details["band_lo"] - (0.587_230_146_175_329_5 - 0.1)).abs() < 1e-12);
        assert!((e.details["band_hi"] - (1.033_061_554_146_506_8 + 0.1)).abs() < 1e-12);

        let lambda = lambda_const(0.5, 0.5).unwrap();
        let recs = synthetic(|_, t| lambda * (t as f64).powf(2.0 / 3.0), 10, 100_000, 20);
        let e = bracket_check(&recs, 0.5, 0.5, 0.5, 0.0, 0.99).unwrap();
        assert!(e.pass);

        let outside = synthetic(|_, t| 2.0 * (t as f64).powf(2.0 / 3.0), 10, 100_000, 20);
        assert!(!bracket_check(&outside, 0.3, 0.7, 0.5, 0.1, 0.99).unwrap().pass);
    }

    #[test]
    fn upper_bound_fixtures() {
        let lambda = lambda_const(0.5, 0.5).unwrap();
        let recs = synthetic(|_, t| 2.0 * lambda * (t as f64).powf(2.0 / 3.0), 10, 1_000_000, 30);
        let e = upper_bound_check(&recs, 0.5, 0.5, 0.99).unwrap();
        assert!(e.pass);
        // 500 exceeds the bound at t = 10 but not at t = 1000 (about 950).
        let early = synthetic(|_, t| if t < 1000 { 500.0 } else { 1.0 }, 10, 1_000_000, 30);
        assert!(upper_bound_check(&early, 0.5, 0.5, 0.99).unwrap().pass);
        let big = synthetic(|_, t| t as f64, 10, 1_000_000, 30);
        assert!(!upper_bound_check(&big, 0.5, 0.5, 0.99).unwrap().pass);
        assert!(upper_bound_check(&recs, 0.5, 0.0, 0.99).is_err());
    }

    #[test]
    fn transience_fixtures() {
        let recs = synthetic(|_, t| (t as f64).powf(2.0 / 3.0), 100, 1_000_000, 30);
        assert!(transience_check(&recs, 0.5, None, 0.99).unwrap().pass);
        let mut returning = recs.clone();
        for r in returning.iter_mut().take(2) {
            r.last_hit_zero = 600_000;
        }
        let e = transience_check(&returning, 0.5, None, 0.99).unwrap();
        assert!(!e.pass);
        assert_eq!(e.details["fraction_no_zero_after_half"], 0.98);
        assert!((e.details["level"] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn doob_fixture_zero_gap() {
        let mut recs = synthetic(|_, t| (t as f64).powf(2.0 / 3.0), 20, 10_000, 20);
        for r in recs.iter_mut() {
            r.doob = Some(
                r.samples
                    .iter()
                    .map(|s| DoobSample { t: s.t, gap: 0.0, drift_y: 0.75 })
                    .collect(),
            );
        }
        let e = doob_check(&recs, 0.5, 0.5, 0.1, 0.95).unwrap();
        assert!(e.pass);
        assert_eq!(e.details["gap_q95"], 0.0);
        assert_eq!(e.details["drift_y_mean_at_horizon"], 0.75);
        let bare = synthetic(|_, t| t as f64, 5, 100, 5);
        assert!(matches!(doob_check(&bare, 0.5, 0.5, 0.1, 0.95), Err(Error::Unsupported(_))));
    }

    #[test]
    fn clt_rejects_beta_zero_and_small_ensembles() {
        let recs = synthetic(|_, t| t as f64, 1000, 100, 5);
        assert!(clt_check(&recs, &drift(0.0, 0.5), 1.0, 0.1, 0.001).is_err());
        assert!(clt_check(&recs[..999], &drift(0.5, 0.5), 1.0, 0.1, 0.001).is_err());
    }

    #[test]
    fn clt_on_exact_normal_fixture() {
        use crate::engine::seed_stream;
        let t_max = 1_000_000u64;
        let lambda = lambda_const(0.5, 0.5).unwrap();
        let sd = clt_std(1.0, 0.5).unwrap();
        let mut passes = 0;
        for seed in 0..20u64 {
            let recs = synthetic(
                |id, t| {
                    let mut rng = seed_stream(seed, id);
                    lambda * (t as f64).powf(2.0 / 3.0) + (t as f64).sqrt() * sd * rng.normal()
                },
                1000,
                t_max,
                3,
            );
            let e = clt_check(&recs, &drift(0.5, 0.5), 1.0, 0.1, 0.001).unwrap();
            // The predicted std is exactly the theory value.
            assert_eq!(e.predicted.unwrap(), clt_std(1.0, 0.5).unwrap());
            passes += e.pass as u32;
        }
        assert!(passes >= 19, "{passes}");
    }
}
