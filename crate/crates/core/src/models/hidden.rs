//! Walk on `[0, inf)` modulated by a hidden two-state environment.
//!
//! The environment picks the noise variance; both states share the same mean
//! drift, so the observed coordinate has a well-defined drift envelope while
//! not being Markov on its own.

use serde::{Deserialize, Serialize};

use crate::engine::Stream;
use crate::error::{Error, Result};
use crate::models::bd::{validate_beta, validate_nonneg, validate_pos};
use crate::models::Process;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiddenStateParams {
    pub beta: f64,
    pub rho: f64,
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
    pub p_flip: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenState {
    pub x: f64,
    /// `false` for environment 0, `true` for environment 1.
    pub env: bool,
}

impl HiddenStateParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        validate_beta(path, self.beta)?;
        validate_nonneg(path, "rho", self.rho)?;
        validate_pos(path, "sigma0_sq", self.sigma0_sq)?;
        validate_pos(path, "sigma1_sq", self.sigma1_sq)?;
        if !(self.p_flip > 0.0 && self.p_flip < 1.0) {
            return Err(Error::config(
                format!("{path}.p_flip"),
                format!("must lie in (0, 1), got {}", self.p_flip),
            ));
        }
        Ok(())
    }

    pub fn sigma(&self, env: bool) -> f64 {
        if env {
            self.sigma1_sq.sqrt()
        } else {
            self.sigma0_sq.sqrt()
        }
    }

    /// Long-run average increment variance (the environment is symmetric, so
    /// each state is occupied half the time).
    pub fn mean_variance(&self) -> f64 {
        0.5 * (self.sigma0_sq + self.sigma1_sq)
    }
}

/// Moves `x` with the current environment's noise, then flips the
/// environment with probability `p_flip`. Consumes one Gaussian and one uniform.
pub fn hidden_step(p: &HiddenStateParams, s: HiddenState, rng: &mut Stream) -> HiddenState {
    let g = rng.normal();
    let x = (s.x + p.rho * s.x.max(1.0).powf(-p.beta) + p.sigma(s.env) * g).abs();
    let env = if rng.uniform() < p.p_flip { !s.env } else { s.env };
    HiddenState { x, env }
}

impl Process for HiddenStateParams {
    type State = HiddenState;

    fn initial_state(&self, start: f64) -> HiddenState {
        HiddenState { x: start, env: false }
    }

    #[inline]
    fn step(&self, s: &mut HiddenState, rng: &mut Stream) {
        *s = hidden_step(self, *s, rng);
    }

    #[inline]
    fn observe(&self, s: &HiddenState) -> f64 {
        s.x
    }

    fn beta(&self) -> f64 {
        self.beta
    }
}
