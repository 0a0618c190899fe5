//! Closed-form limit constants and hypothesis checks.
//!
//! Everything here is a pure function of its arguments. Domain violations are
//! reported as [`Error::Domain`] rather than producing NaN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Drift exponent and coefficients of a process whose mean increment at `x`
/// behaves like `rho * x^-beta`, or oscillates between `a * x^-beta` and
/// `a_upper * x^-beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub beta: f64,
    pub rho: f64,
    pub a: f64,
    #[serde(rename = "A")]
    pub a_upper: f64,
}

impl DriftParams {
    pub fn new(beta: f64, rho: f64, a: f64, a_upper: f64) -> Result<Self> {
        check_beta(beta)?;
        positive("rho", rho)?;
        positive("a", a)?;
        positive("A", a_upper)?;
        if a > a_upper {
            return Err(Error::domain("a", a, "must not exceed A"));
        }
        Ok(Self {
            beta,
            rho,
            a,
            a_upper,
        })
    }

    /// Drift with matching lower and upper coefficients `a = A = rho`.
    pub fn exact(beta: f64, rho: f64) -> Result<Self> {
        Self::new(beta, rho, rho, rho)
    }

    pub fn escape_exponent(&self) -> f64 {
        1.0 / (1.0 + self.beta)
    }
}

/// Increment moment data: a uniform bound `bound` on the `gamma`-th absolute
/// moment and the limiting conditional variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentParams {
    pub gamma: f64,
    #[serde(rename = "B")]
    pub bound: f64,
    pub sigma2: f64,
}

impl MomentParams {
    /// `gamma` may be `+inf` for increments with all moments finite.
    pub fn new(gamma: f64, bound: f64, sigma2: f64) -> Result<Self> {
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(Error::domain("gamma", gamma, "must be positive"));
        }
        positive("B", bound)?;
        positive("sigma2", sigma2)?;
        Ok(Self {
            gamma,
            bound,
            sigma2,
        })
    }
}

/// Which limit theorems have their moment hypotheses met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremApplicability {
    /// `gamma > 1 + beta`: transience and the crude upper bound.
    pub transience_ok: bool,
    /// `gamma > 2 + 2 beta`: sharp almost-sure bounds and the strong law.
    pub sharp_bounds_ok: bool,
    /// Sharp bounds plus `beta > 0`: central limit theorem.
    pub clt_ok: bool,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::domain("beta", beta, "must lie in [0, 1)"));
    }
    Ok(())
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain(name, v, "must be positive and finite"));
    }
    Ok(())
}

/// `(a (1 + beta))^(1 / (1 + beta))`, the almost-sure limit of
/// `X_t / t^(1/(1+beta))` when the drift is `a x^-beta`.
///
/// Evaluated as `exp(ln(a (1+beta)) / (1+beta))`; `beta = 0` returns `a`
/// unchanged.
pub fn lambda_const(a: f64, beta: f64) -> Result<f64> {
    positive("a", a)?;
    check_beta(beta)?;
    if beta == 0.0 {
        return Ok(a);
    }
    let p = 1.0 + beta;
    Ok(((a * p).ln() / p).exp())
}

/// Standard deviation of the Gaussian limit of
/// `(X_t - lambda t^(1/(1+beta))) / sqrt(t)`.
pub fn clt_std(sigma: f64, beta: f64) -> Result<f64> {
    positive("sigma", sigma)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(
            "beta",
            beta,
            "central limit theorem requires beta in (0, 1)",
        ));
    }
    Ok(sigma * ((1.0 + beta) / (1.0 + 3.0 * beta)).sqrt())
}

/// [`clt_std`] specialised to a birth-and-death chain with holding probability `b`,
/// whose increment variance tends to `1 - b`.
pub fn bd_clt_std(b: f64, beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::domain("b", b, "must lie in [0, 1)"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(
            "beta",
            beta,
            "central limit theorem requires beta in (0, 1)",
        ));
    }
    Ok(((1.0 - b) * (1.0 + beta) / (1.0 + 3.0 * beta)).sqrt())
}

/// Hypothesis flags. The inequalities are strict and compared exactly, with
/// no tolerance.
pub fn applicability(m: &MomentParams, d: &DriftParams) -> TheoremApplicability {
    applicability_for(m.gamma, d.beta)
}

pub(crate) fn applicability_for(gamma: f64, beta: f64) -> TheoremApplicability {
    let transience_ok = gamma > 1.0 + beta;
    let sharp_bounds_ok = gamma > 2.0 + 2.0 * beta;
    TheoremApplicability {
        transience_ok,
        sharp_bounds_ok,
        clt_ok: sharp_bounds_ok && beta > 0.0,
    }
}
