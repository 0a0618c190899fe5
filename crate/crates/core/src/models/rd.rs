//! Non-homogeneous random walk on `R^d` with radial drift
//! `rho * max(|x|, 1)^-beta` and isotropic Gaussian noise.

use serde::{Deserialize, Serialize};

use crate::engine::Stream;
use crate::error::{Error, Result};
use crate::models::bd::{validate_nonneg, validate_pos};
use crate::models::Process;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RdWalkParams {
    pub d: usize,
    pub beta: f64,
    pub rho: f64,
    pub noise_sigma: f64,
}

impl RdWalkParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        if self.d < 2 {
            return Err(Error::config(
                format!("{path}.d"),
                format!("must be at least 2, got {}", self.d),
            ));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::config(
                format!("{path}.beta"),
                format!("must lie in (0, 1), got {}", self.beta),
            ));
        }
        validate_nonneg(path, "rho", self.rho)?;
        validate_pos(path, "noise_sigma", self.noise_sigma)
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Unit vector along `v`, with `e_1` at the origin.
pub fn direction(v: &[f64]) -> Vec<f64> {
    let r = norm(v);
    if r == 0.0 {
        let mut e = vec![0.0; v.len()];
        e[0] = 1.0;
        e
    } else {
        v.iter().map(|c| c / r).collect()
    }
}

fn apply_drift(p: &RdWalkParams, xi: &mut [f64]) {
    let r = norm(xi);
    let push = p.rho * r.max(1.0).powf(-p.beta);
    if r == 0.0 {
        xi[0] += push;
    } else {
        let k = push / r;
        xi.iter_mut().for_each(|c| *c += k * *c);
    }
}

/// Adds the drift and the given noise vector to `xi` in place.
pub fn rd_step_with_noise(p: &RdWalkParams, xi: &mut [f64], noise: &[f64]) {
    apply_drift(p, xi);
    for (c, w) in xi.iter_mut().zip(noise) {
        *c += w;
    }
}

fn rd_step_in_place(p: &RdWalkParams, xi: &mut [f64], rng: &mut Stream) {
    apply_drift(p, xi);
    for c in xi.iter_mut() {
        *c += p.noise_sigma * rng.normal();
    }
}

pub fn rd_step(p: &RdWalkParams, xi: &[f64], rng: &mut Stream) -> Vec<f64> {
    let mut next = xi.to_vec();
    rd_step_in_place(p, &mut next, rng);
    next
}

impl Process for RdWalkParams {
    type State = Vec<f64>;

    fn initial_state(&self, start: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        v[0] = start;
        v
    }

    #[inline]
    fn step(&self, xi: &mut Vec<f64>, rng: &mut Stream) {
        rd_step_in_place(self, xi, rng);
    }

    #[inline]
    fn observe(&self, xi: &Vec<f64>) -> f64 {
        norm(xi)
    }

    fn direction(&self, xi: &Vec<f64>) -> Option<Vec<f64>> {
        Some(direction(xi))
    }

    fn beta(&self) -> f64 {
        self.beta
    }
}
