//! Nearest-neighbour birth-and-death chains on the nonnegative integers.
//!
//! At `x >= 1` the chain steps up with probability `a_x`, holds with `b_x = b`
//! and steps down with `c_x`, where `a_x - c_x = d_x` and
//! `d_x = min(coef(x) * x^-beta, 0.999 (1 - b))`. At `0` it jumps to `1`.

use serde::{Deserialize, Serialize};

use crate::engine::Stream;
use crate::error::{Error, Result};
use crate::models::Process;

/// Fraction of `1 - b` the drift may occupy; keeps `c_x > 0`.
pub const DRIFT_CLAMP: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BdChainParams {
    pub beta: f64,
    pub rho: f64,
    #[serde(default)]
    pub b: f64,
}

/// Birth-and-death chain whose drift coefficient alternates on dyadic blocks:
/// `a` when `floor(log2(1 + x))` is even, `A` when it is odd.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscDriftParams {
    pub beta: f64,
    pub a: f64,
    #[serde(rename = "A")]
    pub a_upper: f64,
    #[serde(default)]
    pub b: f64,
}

pub(crate) fn validate_beta(path: &str, beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::config(
            format!("{path}.beta"),
            format!("must lie in [0, 1), got {beta}"),
        ));
    }
    Ok(())
}

pub(crate) fn validate_nonneg(path: &str, name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::config(
            format!("{path}.{name}"),
            format!("must be finite and nonnegative, got {v}"),
        ));
    }
    Ok(())
}

pub(crate) fn validate_pos(path: &str, name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::config(
            format!("{path}.{name}"),
            format!("must be finite and positive, got {v}"),
        ));
    }
    Ok(())
}

fn validate_b(path: &str, b: f64) -> Result<()> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::config(
            format!("{path}.b"),
            format!("must lie in [0, 1), got {b}"),
        ));
    }
    Ok(())
}

impl BdChainParams {
    /// `rho = 0` is accepted: the symmetric chain serves as a recurrent control.
    pub fn new(beta: f64, rho: f64, b: f64) -> Result<Self> {
        let p = Self { beta, rho, b };
        p.validate("model")?;
        Ok(p)
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        validate_beta(path, self.beta)?;
        validate_nonneg(path, "rho", self.rho)?;
        validate_b(path, self.b)
    }
}

impl OscDriftParams {
    pub fn new(beta: f64, a: f64, a_upper: f64, b: f64) -> Result<Self> {
        let p = Self {
            beta,
            a,
            a_upper,
            b,
        };
        p.validate("model")?;
        Ok(p)
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        validate_beta(path, self.beta)?;
        validate_pos(path, "a", self.a)?;
        validate_pos(path, "A", self.a_upper)?;
        if self.a > self.a_upper {
            return Err(Error::config(
                format!("{path}.a"),
                format!("must not exceed A ({} > {})", self.a, self.a_upper),
            ));
        }
        validate_b(path, self.b)
    }

    /// Drift coefficient in force at `x`.
    pub fn coefficient(&self, x: u64) -> f64 {
        if dyadic_block(x) % 2 == 0 {
            self.a
        } else {
            self.a_upper
        }
    }
}

/// `floor(log2(1 + x))`, computed exactly.
pub fn dyadic_block(x: u64) -> u32 {
    63 - x.saturating_add(1).leading_zeros()
}

/// Transition law shared by the constant and dyadic-coefficient chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BirthDeath {
    Constant(BdChainParams),
    Dyadic(OscDriftParams),
}

impl BirthDeath {
    pub fn beta(&self) -> f64 {
        match self {
            BirthDeath::Constant(p) => p.beta,
            BirthDeath::Dyadic(p) => p.beta,
        }
    }

    pub fn hold(&self) -> f64 {
        match self {
            BirthDeath::Constant(p) => p.b,
            BirthDeath::Dyadic(p) => p.b,
        }
    }

    pub fn coefficient(&self, x: u64) -> f64 {
        match self {
            BirthDeath::Constant(p) => p.rho,
            BirthDeath::Dyadic(p) => p.coefficient(x),
        }
    }

    /// `(a_x, b_x, c_x)`; `(1, 0, 0)` at the origin.
    pub fn probs(&self, x: u64) -> (f64, f64, f64) {
        if x == 0 {
            return (1.0, 0.0, 0.0);
        }
        let b = self.hold();
        let free = 1.0 - b;
        let raw = self.coefficient(x) * (x as f64).powf(-self.beta());
        let d = raw.min(DRIFT_CLAMP * free);
        ((free + d) / 2.0, b, (free - d) / 2.0)
    }

    /// Exact `E[X'^(1+beta) - x^(1+beta)]` from state `x`.
    pub fn drift_y(&self, x: u64) -> f64 {
        if x == 0 {
            return 1.0;
        }
        let (a, _, c) = self.probs(x);
        let p = 1.0 + self.beta();
        let xf = x as f64;
        let y = xf.powf(p);
        // (x +- 1)^p - x^p written as x^p expm1(p ln1p(+-1/x)) to avoid cancellation.
        let up = y * (p * (1.0 / xf).ln_1p()).exp_m1();
        let down = y * (p * (-1.0 / xf).ln_1p()).exp_m1();
        a * up + c * down
    }

    /// Exact `E[(1 + X')^-nu - (1 + x)^-nu]` from state `x`.
    pub fn drift_lyapunov(&self, x: u64, nu: f64) -> f64 {
        let (a, _, c) = self.probs(x);
        let base = 1.0 + x as f64;
        let w = base.powf(-nu);
        let up = w * (-nu * (1.0 / base).ln_1p()).exp_m1();
        let down = w * (-nu * (-1.0 / base).ln_1p()).exp_m1();
        a * up + c * down
    }
}

pub fn bd_probs(p: &BdChainParams, x: u64) -> (f64, f64, f64) {
    BirthDeath::Constant(*p).probs(x)
}

/// One transition driven by a single uniform `u`: up if `u < a_x`, hold if
/// `u < a_x + b_x`, down otherwise.
#[inline]
pub fn bd_step(p: &BdChainParams, x: u64, u: f64) -> u64 {
    let (a, b, _) = bd_probs(p, x);
    apply_uniform(x, u, a, a + b)
}

#[inline]
fn apply_uniform(x: u64, u: f64, up: f64, stay: f64) -> u64 {
    if u < up {
        x + 1
    } else if u < stay {
        x
    } else {
        x - 1
    }
}

pub fn exact_drift_y(p: &BdChainParams, x: u64) -> f64 {
    BirthDeath::Constant(*p).drift_y(x)
}

pub fn exact_drift_lyapunov(p: &BdChainParams, x: u64, nu: f64) -> f64 {
    BirthDeath::Constant(*p).drift_lyapunov(x, nu)
}

/// One dyadic-coefficient transition; same uniform convention as [`bd_step`].
pub fn osc_step(p: &OscDriftParams, x: u64, u: f64) -> u64 {
    let (a, b, _) = BirthDeath::Dyadic(*p).probs(x);
    apply_uniform(x, u, a, a + b)
}

/// Smallest `m` in `[1, x_max]` such that the Lyapunov drift is nonpositive on
/// every integer of `[m, x_max]`, or `None` if it is positive at `x_max`.
pub fn lyapunov_threshold(chain: &BirthDeath, nu: f64, x_max: u64) -> Option<u64> {
    let mut m = None;
    for x in (1..=x_max).rev() {
        if chain.drift_lyapunov(x, nu) <= 0.0 {
            m = Some(x);
        } else {
            break;
        }
    }
    m
}

/// Table-driven stepper. Thresholds for `x < table.len()` are precomputed
/// with [`BirthDeath::probs`], so results match [`bd_step`] bit for bit.
#[derive(Debug, Clone)]
pub struct BdProcess {
    chain: BirthDeath,
    up: Vec<f64>,
    stay: Vec<f64>,
    drift_y: Vec<f64>,
}

/// Largest table built regardless of horizon (entries per array).
const MAX_TABLE: u64 = 1 << 22;

impl BdProcess {
    pub fn new(chain: BirthDeath, max_state: u64, with_drift_y: bool) -> Self {
        let len = max_state.saturating_add(2).min(MAX_TABLE) as usize;
        let mut up = Vec::with_capacity(len);
        let mut stay = Vec::with_capacity(len);
        for x in 0..len as u64 {
            let (a, b, _) = chain.probs(x);
            up.push(a);
            stay.push(a + b);
        }
        let drift_y = if with_drift_y {
            (0..len as u64).map(|x| chain.drift_y(x)).collect()
        } else {
            Vec::new()
        };
        Self {
            chain,
            up,
            stay,
            drift_y,
        }
    }

    pub fn chain(&self) -> &BirthDeath {
        &self.chain
    }
}

impl Process for BdProcess {
    type State = u64;

    fn initial_state(&self, start: f64) -> u64 {
        start as u64
    }

    #[inline]
    fn step(&self, x: &mut u64, rng: &mut Stream) {
        let u = rng.uniform();
        let i = *x as usize;
        *x = if i < self.up.len() {
            apply_uniform(*x, u, self.up[i], self.stay[i])
        } else {
            let (a, b, _) = self.chain.probs(*x);
            apply_uniform(*x, u, a, a + b)
        };
    }

    #[inline]
    fn observe(&self, x: &u64) -> f64 {
        *x as f64
    }

    #[inline]
    fn drift_y(&self, x: &u64) -> Option<f64> {
        let i = *x as usize;
        Some(if i < self.drift_y.len() {
            self.drift_y[i]
        } else {
            self.chain.drift_y(*x)
        })
    }

    fn beta(&self) -> f64 {
        self.chain.beta()
    }
}
