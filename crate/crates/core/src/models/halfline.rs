//! Continuous-state walks on `[0, inf)` with drift `rho * max(x, 1)^-beta`
//! plus symmetric noise, reflected at the origin by taking absolute values.

use serde::{Deserialize, Serialize};

use crate::engine::Stream;
use crate::error::{Error, Result};
use crate::models::bd::{validate_beta, validate_nonneg, validate_pos};
use crate::models::Process;

/// Symmetric, mean-zero increment noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// +1 or -1 with probability 1/2 each.
    UniformPm1,
    /// `sigma * Z` clamped to `[-cap, cap]`.
    TruncatedGaussian { sigma: f64, cap: f64 },
    /// Random sign times `scale * U^(-1/tail_index)`; moments of order below
    /// `tail_index` are finite.
    TwoSidedPareto { tail_index: f64, scale: f64 },
}

impl NoiseSpec {
    pub fn validate(&self, path: &str) -> Result<()> {
        match *self {
            NoiseSpec::UniformPm1 => Ok(()),
            NoiseSpec::TruncatedGaussian { sigma, cap } => {
                validate_pos(path, "sigma", sigma)?;
                validate_pos(path, "cap", cap)
            }
            NoiseSpec::TwoSidedPareto { tail_index, scale } => {
                validate_pos(path, "scale", scale)?;
                if !(tail_index > 1.0 && tail_index.is_finite()) {
                    return Err(Error::config(
                        format!("{path}.tail_index"),
                        format!("must exceed 1 so the noise has a mean, got {tail_index}"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Supremum of the finite absolute-moment orders.
    pub fn gamma(&self) -> f64 {
        match *self {
            NoiseSpec::TwoSidedPareto { tail_index, .. } => tail_index,
            _ => f64::INFINITY,
        }
    }

    /// Exact variance, or `None` when it is infinite.
    pub fn variance(&self) -> Option<f64> {
        match *self {
            NoiseSpec::UniformPm1 => Some(1.0),
            NoiseSpec::TruncatedGaussian { sigma, cap } => {
                let c = cap / sigma;
                let tail = libm::erfc(c / std::f64::consts::SQRT_2); // P(|Z| > c)
                let density = (-0.5 * c * c).exp() / (2.0 * std::f64::consts::PI).sqrt();
                let inner = (1.0 - tail) - 2.0 * c * density; // E[Z^2; |Z| <= c]
                Some(sigma * sigma * inner + cap * cap * tail)
            }
            NoiseSpec::TwoSidedPareto { tail_index, scale } => {
                (tail_index > 2.0).then(|| scale * scale * tail_index / (tail_index - 2.0))
            }
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        match *self {
            NoiseSpec::UniformPm1 => {
                if rng.uniform() < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            NoiseSpec::TruncatedGaussian { sigma, cap } => (sigma * rng.normal()).clamp(-cap, cap),
            NoiseSpec::TwoSidedPareto { tail_index, scale } => {
                let negative = rng.uniform() < 0.5;
                let v = 1.0 - rng.uniform();
                let m = scale * v.powf(-1.0 / tail_index);
                if negative {
                    -m
                } else {
                    m
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfLineWalkParams {
    pub beta: f64,
    pub rho: f64,
    pub noise: NoiseSpec,
}

impl HalfLineWalkParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        validate_beta(path, self.beta)?;
        validate_nonneg(path, "rho", self.rho)?;
        self.noise.validate(&format!("{path}.noise"))
    }

    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        self.rho * x.max(1.0).powf(-self.beta)
    }
}

/// Deterministic part of a step: `|x + drift(x) + noise|`.
#[inline]
pub fn halfline_step_with_noise(p: &HalfLineWalkParams, x: f64, noise: f64) -> f64 {
    (x + p.drift(x) + noise).abs()
}

pub fn halfline_step(p: &HalfLineWalkParams, x: f64, rng: &mut Stream) -> f64 {
    let n = p.noise.sample(rng);
    halfline_step_with_noise(p, x, n)
}

impl Process for HalfLineWalkParams {
    type State = f64;

    fn initial_state(&self, start: f64) -> f64 {
        start
    }

    #[inline]
    fn step(&self, x: &mut f64, rng: &mut Stream) {
        *x = halfline_step(self, *x, rng);
    }

    #[inline]
    fn observe(&self, x: &f64) -> f64 {
        *x
    }

    fn beta(&self) -> f64 {
        self.beta
    }
}
