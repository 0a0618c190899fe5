//! Recovers `(rho, beta, sigma^2)` from binned one-step increments.
//!
//! Within each geometric bin the first two increment moments are estimated
//! by sample means; `ln mu1 = ln rho - beta ln x` is then fitted by weighted
//! least squares with inverse-variance (delta-method) weights.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::engine::csv::fmt_real;
use crate::engine::TransitionBins;
use crate::error::{Error, Result};

/// Transitions a bin needs before it enters the fit.
pub const MIN_BIN_COUNT: u64 = 100;
pub const MIN_USABLE_BINS: usize = 5;
pub const DEFAULT_MIN_TRANSITIONS: u64 = 100_000;
/// Bins (largest `x` first) pooled for the variance estimate.
const SIGMA_BINS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub x_min: f64,
    pub x_max: f64,
    pub min_transitions: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            x_min: 1.0,
            x_max: f64::INFINITY,
            min_transitions: DEFAULT_MIN_TRANSITIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinStat {
    pub lo: f64,
    pub hi: f64,
    /// Mean state of the transitions in the bin.
    pub x: f64,
    pub count: u64,
    pub mu1: f64,
    pub mu2: f64,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftFit {
    pub rho_hat: f64,
    pub rho_stderr: f64,
    pub beta_hat: f64,
    pub beta_stderr: f64,
    pub sigma2_hat: f64,
    pub sigma2_stderr: f64,
    pub transitions: u64,
    pub bins_used: usize,
    pub bins: Vec<BinStat>,
}

pub fn drift_fit(bins: &TransitionBins, opts: &FitOptions) -> Result<DriftFit> {
    let total = bins.total();
    if total < opts.min_transitions {
        return Err(Error::InsufficientData {
            what: "drift fit transitions",
            needed: opts.min_transitions as usize,
            got: total as usize,
        });
    }

    let mut stats = Vec::new();
    for k in 0..bins.len() {
        let n = bins.count[k];
        if n == 0 {
            continue;
        }
        let (lo, hi) = bins.edges(k);
        let nf = n as f64;
        let x = bins.sum_x[k] / nf;
        let mu1 = bins.sum_dx[k] / nf;
        let mu2 = bins.sum_dx2[k] / nf;
        let used = n >= MIN_BIN_COUNT && mu1 > 0.0 && x >= opts.x_min && x <= opts.x_max;
        stats.push(BinStat {
            lo,
            hi,
            x,
            count: n,
            mu1,
            mu2,
            used,
        });
    }

    let usable: Vec<&BinStat> = stats.iter().filter(|b| b.used).collect();
    if usable.len() < MIN_USABLE_BINS {
        return Err(Error::FitDegenerate(format!(
            "{} usable bins, need at least {MIN_USABLE_BINS}",
            usable.len()
        )));
    }

    // Points (ln x, ln mu1) weighted by 1 / Var(ln mu1) ~ n mu1^2 / Var(dx).
    let mut pts = Vec::with_capacity(usable.len());
    for b in &usable {
        let var = (b.mu2 - b.mu1 * b.mu1).max(1e-12 * b.mu1 * b.mu1);
        let w = b.count as f64 * b.mu1 * b.mu1 / var;
        pts.push((b.x.ln(), b.mu1.ln(), w));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y, w) in &pts {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::FitDegenerate("bins span no range of x".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = (1.0 / sxx).sqrt();
    let intercept_se = (1.0 / sw + mx * mx / sxx).sqrt();

    let beta_hat = -slope;
    if !(-0.5..=1.5).contains(&beta_hat) {
        return Err(Error::FitDegenerate(format!(
            "beta_hat = {beta_hat} outside the sanity window [-0.5, 1.5]"
        )));
    }
    let rho_hat = intercept.exp();

    // sigma^2 from the largest-x bins with enough data.
    let mut tail: Vec<usize> = (0..bins.len())
        .filter(|&k| {
            let n = bins.count[k];
            n >= MIN_BIN_COUNT && {
                let x = bins.sum_x[k] / n as f64;
                x >= opts.x_min && x <= opts.x_max
            }
        })
        .collect();
    tail.reverse();
    tail.truncate(SIGMA_BINS);
    let n2: u64 = tail.iter().map(|&k| bins.count[k]).sum();
    let s2: f64 = tail.iter().map(|&k| bins.sum_dx2[k]).sum();
    let s4: f64 = tail.iter().map(|&k| bins.sum_dx4[k]).sum();
    let sigma2_hat = s2 / n2 as f64;
    let sigma2_stderr = ((s4 / n2 as f64 - sigma2_hat * sigma2_hat).max(0.0) / n2 as f64).sqrt();

    Ok(DriftFit {
        rho_hat,
        rho_stderr: rho_hat * intercept_se,
        beta_hat,
        beta_stderr: slope_se,
        sigma2_hat,
        sigma2_stderr,
        transitions: total,
        bins_used: usable.len(),
        bins: stats,
    })
}

/// Per-bin `x,mu1,mu2,count,used` table for plotting.
pub fn write_bins_csv<W: Write>(mut w: W, fit: &DriftFit) -> io::Result<()> {
    w.write_all(b"x,mu1,mu2,count,used\n")?;
    for b in &fit.bins {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_real(b.x),
            fmt_real(b.mu1),
            fmt_real(b.mu2),
            b.count,
            b.used as u8
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Noiseless transitions: `dx = rho x^-beta` at one point per bin.
    pub(crate) fn synthetic(rho: f64, beta: f64) -> TransitionBins {
        let mut bins = TransitionBins::default();
        for k in 0..60 {
            let x = 10f64.powf((k as f64 + 0.5) / 10.0);
            for _ in 0..2000 {
                bins.push(x, rho * x.powf(-beta));
            }
        }
        bins
    }

    #[test]
    fn exact_recovery_without_noise() {
        let fit = drift_fit(&synthetic(0.5, 0.5), &FitOptions::default()).unwrap();
        assert!((fit.rho_hat - 0.5).abs() < 1e-9, "{}", fit.rho_hat);
        assert!((fit.beta_hat - 0.5).abs() < 1e-9, "{}", fit.beta_hat);
        assert_eq!(fit.bins_used, 60);

        let fit = drift_fit(&synthetic(1.7, 0.2), &FitOptions::default()).unwrap();
        assert!((fit.rho_hat - 1.7).abs() < 1e-9);
        assert!((fit.beta_hat - 0.2).abs() < 1e-9);
    }

    #[test]
    fn window_restricts_bins() {
        let opts = FitOptions {
            x_min: 100.0,
            x_max: 1e4,
            ..FitOptions::default()
        };
        let fit = drift_fit(&synthetic(0.5, 0.5), &opts).unwrap();
        assert!(fit.bins.iter().filter(|b| b.used).all(|b| b.x >= 100.0 && b.x <= 1e4));
        assert_eq!(fit.bins_used, 20);
    }

    #[test]
    fn degenerate_inputs() {
        let empty = TransitionBins::default();
        assert!(matches!(
            drift_fit(&empty, &FitOptions::default()),
            Err(Error::InsufficientData { .. })
        ));
        let mut few = TransitionBins::default();
        for _ in 0..200_000 {
            few.push(3.0, 0.1);
        }
        assert!(matches!(
            drift_fit(&few, &FitOptions::default()),
            Err(Error::FitDegenerate(_))
        ));
    }

    #[test]
    fn sigma2_from_symmetric_steps() {
        let mut bins = synthetic(0.5, 0.5);
        // Add unit +-1 noise on top in the top bins by pairing steps.
        let mut noisy = TransitionBins::default();
        noisy.merge(&bins);
        for k in 50..60 {
            let x = 10f64.powf((k as f64 + 0.5) / 10.0);
            for _ in 0..5000 {
                noisy.push(x, 1.0);
                noisy.push(x, -1.0);
            }
        }
        bins = noisy;
        let fit = drift_fit(&bins, &FitOptions::default()).unwrap();
        assert!((fit.sigma2_hat - 10_000.0 / 12_000.0).abs() < 1e-3, "{}", fit.sigma2_hat);
    }
}
