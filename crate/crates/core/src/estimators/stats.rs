use serde::{Deserialize, Serialize};

/// Point estimate with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub point: f64,
    pub stderr: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub n: usize,
}

impl EstimateCI {
    pub fn new(point: f64, stderr: f64, n: usize) -> Self {
        let stderr = stderr.max(0.0);
        Self {
            point,
            stderr,
            ci95_lo: point - 1.96 * stderr,
            ci95_hi: point + 1.96 * stderr,
            n,
        }
    }

    /// Sample mean with standard error `s / sqrt(n)`.
    pub fn mean_of(xs: &[f64]) -> Self {
        let (mean, var) = mean_var(xs);
        let n = xs.len();
        let se = if n > 1 { (var / n as f64).sqrt() } else { 0.0 };
        Self::new(mean, se, n)
    }
}

/// Mean and unbiased variance, summed in slice order.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Linear-interpolated quantile of unsorted data, `q` in `[0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}
