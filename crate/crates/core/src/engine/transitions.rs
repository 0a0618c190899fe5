//! Binned sufficient statistics of one-step increments, accumulated while
//! stepping so that no transition list is ever stored.

use serde::{Deserialize, Serialize};

/// Geometric bins `[x_min 10^(k/p), x_min 10^((k+1)/p))` with `p` bins per
/// decade. States below `x_min` are not recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionBins {
    pub x_min: f64,
    pub bins_per_decade: u32,
    pub count: Vec<u64>,
    pub sum_x: Vec<f64>,
    pub sum_dx: Vec<f64>,
    pub sum_dx2: Vec<f64>,
    pub sum_dx4: Vec<f64>,
}

impl Default for TransitionBins {
    fn default() -> Self {
        Self::new(1.0, 10, 12)
    }
}

impl TransitionBins {
    pub fn new(x_min: f64, bins_per_decade: u32, decades: u32) -> Self {
        let n = (bins_per_decade * decades) as usize;
        Self {
            x_min,
            bins_per_decade,
            count: vec![0; n],
            sum_x: vec![0.0; n],
            sum_dx: vec![0.0; n],
            sum_dx2: vec![0.0; n],
            sum_dx4: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.count.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn total(&self) -> u64 {
        self.count.iter().sum()
    }

    /// Lower and upper edge of bin `k`.
    pub fn edges(&self, k: usize) -> (f64, f64) {
        let p = self.bins_per_decade as f64;
        (
            self.x_min * 10f64.powf(k as f64 / p),
            self.x_min * 10f64.powf((k + 1) as f64 / p),
        )
    }

    #[inline]
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.x_min) {
            return None;
        }
        let k = ((x / self.x_min).log10() * self.bins_per_decade as f64) as usize;
        (k < self.count.len()).then_some(k)
    }

    #[inline]
    pub fn push(&mut self, x: f64, dx: f64) {
        if let Some(k) = self.bin_of(x) {
            let d2 = dx * dx;
            self.count[k] += 1;
            self.sum_x[k] += x;
            self.sum_dx[k] += dx;
            self.sum_dx2[k] += d2;
            self.sum_dx4[k] += d2 * d2;
        }
    }

    /// Adds `other` bin by bin. Both must share the same layout.
    pub fn merge(&mut self, other: &TransitionBins) {
        assert!(
            self.x_min == other.x_min
                && self.bins_per_decade == other.bins_per_decade
                && self.len() == other.len(),
            "transition bin layouts differ"
        );
        for k in 0..self.len() {
            self.count[k] += other.count[k];
            self.sum_x[k] += other.sum_x[k];
            self.sum_dx[k] += other.sum_dx[k];
            self.sum_dx2[k] += other.sum_dx2[k];
            self.sum_dx4[k] += other.sum_dx4[k];
        }
    }
}
