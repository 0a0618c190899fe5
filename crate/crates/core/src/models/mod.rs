//! Process families and the single-step interface the engine drives.

pub mod bd;
pub mod halfline;
pub mod hidden;
pub mod rd;

use serde::{Deserialize, Serialize};

use crate::engine::Stream;
use crate::error::Result;

pub use bd::{
    bd_probs, bd_step, exact_drift_lyapunov, exact_drift_y, lyapunov_threshold, osc_step,
    BdChainParams, BdProcess, BirthDeath, OscDriftParams,
};
pub use halfline::{halfline_step, HalfLineWalkParams, NoiseSpec};
pub use hidden::{hidden_step, HiddenState, HiddenStateParams};
pub use rd::{rd_step, RdWalkParams};

/// A process the engine can step.
///
/// Implementations are immutable once built; all randomness comes from the
/// caller's [`Stream`].
pub trait Process: Sync {
    type State: Clone + Send;

    fn initial_state(&self, start: f64) -> Self::State;

    fn step(&self, state: &mut Self::State, rng: &mut Stream);

    /// The scalar coordinate `X_t` (the norm for vector-valued walks).
    fn observe(&self, state: &Self::State) -> f64;

    /// Exact conditional drift of `X^(1+beta)` from `state`, where known.
    fn drift_y(&self, _state: &Self::State) -> Option<f64> {
        None
    }

    /// Unit direction of a vector-valued state.
    fn direction(&self, _state: &Self::State) -> Option<Vec<f64>> {
        None
    }

    fn beta(&self) -> f64;
}

/// Model selection as it appears in the `model` object of a run config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Bd(BdChainParams),
    Halfline(HalfLineWalkParams),
    Osc(OscDriftParams),
    Hidden(HiddenStateParams),
    Rd(RdWalkParams),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let path = "model";
        match self {
            ModelSpec::Bd(p) => p.validate(path),
            ModelSpec::Halfline(p) => p.validate(path),
            ModelSpec::Osc(p) => p.validate(path),
            ModelSpec::Hidden(p) => p.validate(path),
            ModelSpec::Rd(p) => p.validate(path),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            ModelSpec::Bd(_) => "bd",
            ModelSpec::Halfline(_) => "halfline",
            ModelSpec::Osc(_) => "osc",
            ModelSpec::Hidden(_) => "hidden",
            ModelSpec::Rd(_) => "rd",
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            ModelSpec::Bd(p) => p.beta,
            ModelSpec::Halfline(p) => p.beta,
            ModelSpec::Osc(p) => p.beta,
            ModelSpec::Hidden(p) => p.beta,
            ModelSpec::Rd(p) => p.beta,
        }
    }

    /// Limiting drift coefficient; `None` for the oscillating family, which
    /// has no single limit.
    pub fn rho(&self) -> Option<f64> {
        match self {
            ModelSpec::Bd(p) => Some(p.rho),
            ModelSpec::Halfline(p) => Some(p.rho),
            ModelSpec::Osc(_) => None,
            ModelSpec::Hidden(p) => Some(p.rho),
            ModelSpec::Rd(p) => Some(p.rho),
        }
    }

    /// `(liminf, limsup)` of `x^beta` times the mean drift.
    pub fn drift_bounds(&self) -> (f64, f64) {
        match self {
            ModelSpec::Osc(p) => (p.a, p.a_upper),
            other => {
                let r = other.rho().unwrap_or(0.0);
                (r, r)
            }
        }
    }

    /// Limiting conditional increment variance when it is known exactly.
    pub fn sigma2(&self) -> Option<f64> {
        match self {
            ModelSpec::Bd(p) => Some(1.0 - p.b),
            ModelSpec::Osc(p) => Some(1.0 - p.b),
            ModelSpec::Halfline(p) => p.noise.variance(),
            // The environment keeps switching, so there is no limit.
            ModelSpec::Hidden(_) => None,
            ModelSpec::Rd(p) => Some(p.noise_sigma * p.noise_sigma),
        }
    }

    /// Supremum of the finite increment-moment orders.
    pub fn increment_gamma(&self) -> f64 {
        match self {
            ModelSpec::Halfline(p) => p.noise.gamma(),
            _ => f64::INFINITY,
        }
    }

    pub fn has_exact_drift(&self) -> bool {
        matches!(self, ModelSpec::Bd(_) | ModelSpec::Osc(_))
    }

    pub fn is_integer_valued(&self) -> bool {
        self.has_exact_drift()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tagged_models() {
        let m: ModelSpec = serde_json::from_str(r#"{"type":"bd","beta":0.5,"rho":0.5}"#).unwrap();
        assert_eq!(
            m,
            ModelSpec::Bd(BdChainParams {
                beta: 0.5,
                rho: 0.5,
                b: 0.0
            })
        );
        let m: ModelSpec =
            serde_json::from_str(r#"{"type":"osc","beta":0.5,"a":0.3,"A":0.7}"#).unwrap();
        assert_eq!(m.drift_bounds(), (0.3, 0.7));
        let m: ModelSpec = serde_json::from_str(
            r#"{"type":"halfline","beta":0.5,"rho":0.5,"noise":{"kind":"truncated_gaussian","sigma":1,"cap":3}}"#,
        )
        .unwrap();
        assert_eq!(m.increment_gamma(), f64::INFINITY);
        let m: ModelSpec = serde_json::from_str(
            r#"{"type":"rd","d":3,"beta":0.5,"rho":0.5,"noise_sigma":1}"#,
        )
        .unwrap();
        assert_eq!(m.sigma2(), Some(1.0));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(serde_json::from_str::<ModelSpec>(r#"{"type":"bd","beta":0.5,"rho":0.5,"gamma":3}"#).is_err());
        assert!(serde_json::from_str::<ModelSpec>(r#"{"type":"levy","beta":0.5}"#).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let m = ModelSpec::Osc(OscDriftParams::new(0.5, 0.3, 0.7, 0.1).unwrap());
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<ModelSpec>(&s).unwrap(), m);
    }
}
