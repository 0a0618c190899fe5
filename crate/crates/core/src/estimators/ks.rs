//! One-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KS_MIN_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub pvalue: f64,
    pub n: usize,
}

/// `P(K > lambda)` for the Kolmogorov distribution:
/// `2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2)`, truncated once a term
/// drops below `1e-10`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let l2 = lambda * lambda;
    let mut sum = 0.0;
    for k in 1..=100_000u32 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * l2).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-10 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `sup |F_n - F|` over the sample.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::InsufficientData {
            what: "Kolmogorov-Smirnov test",
            needed: KS_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let d = ks_statistic(samples, cdf);
    let n = samples.len();
    Ok(KsResult {
        statistic: d,
        pvalue: kolmogorov_survival((n as f64).sqrt() * d),
        n,
    })
}

/// Normal CDF through the complementary error function.
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * libm::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}
