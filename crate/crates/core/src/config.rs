//! JSON run configuration: model, engine, checks and output.
//!
//! Unknown keys are rejected everywhere. Errors carry a dotted path to the
//! offending field (`model.beta`, `checks[1].quorum`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::EnsembleConfig;
use crate::error::{Error, Result};
use crate::models::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

impl OutputSpec {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// A check to run, with optional overrides of its default thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Lln {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Clt {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        std_tolerance: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ks_pvalue_floor: Option<f64>,
        /// Overrides the model's limiting increment variance.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma2: Option<f64>,
    },
    EscapeExponent {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Bracket {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slack: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quorum: Option<f64>,
    },
    UpperBound {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quorum: Option<f64>,
    },
    Transience {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        level: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quorum: Option<f64>,
    },
    Doob {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factor: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quorum: Option<f64>,
    },
    DriftFit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_max: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta_tolerance: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho_tolerance: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_transitions: Option<u64>,
    },
    RdNormDirection {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Lln { .. } => "lln",
            CheckSpec::Clt { .. } => "clt",
            CheckSpec::EscapeExponent { .. } => "escape_exponent",
            CheckSpec::Bracket { .. } => "bracket",
            CheckSpec::UpperBound { .. } => "upper_bound",
            CheckSpec::Transience { .. } => "transience",
            CheckSpec::Doob { .. } => "doob",
            CheckSpec::DriftFit { .. } => "drift_fit",
            CheckSpec::RdNormDirection { .. } => "rd_norm_direction",
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::config(
                    format!("{path}.{name}"),
                    format!("must be finite and positive, got {x}"),
                )),
                _ => Ok(()),
            }
        };
        let fraction = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !(x > 0.0 && x <= 1.0) => Err(Error::config(
                    format!("{path}.{name}"),
                    format!("must lie in (0, 1], got {x}"),
                )),
                _ => Ok(()),
            }
        };
        match *self {
            CheckSpec::Lln { tolerance } | CheckSpec::EscapeExponent { tolerance } | CheckSpec::RdNormDirection { tolerance } => {
                positive("tolerance", tolerance)
            }
            CheckSpec::Clt {
                std_tolerance,
                ks_pvalue_floor,
                sigma2,
            } => {
                positive("std_tolerance", std_tolerance)?;
                fraction("ks_pvalue_floor", ks_pvalue_floor)?;
                positive("sigma2", sigma2)
            }
            CheckSpec::Bracket { slack, quorum } => {
                if let Some(s) = slack {
                    if !(s >= 0.0 && s.is_finite()) {
                        return Err(Error::config(format!("{path}.slack"), format!("must be nonnegative, got {s}")));
                    }
                }
                fraction("quorum", quorum)
            }
            CheckSpec::UpperBound { eps, quorum } => {
                positive("eps", eps)?;
                fraction("quorum", quorum)
            }
            CheckSpec::Transience { level, quorum } => {
                if let Some(k) = level {
                    if !(k >= 1.0 && k.is_finite()) {
                        return Err(Error::config(format!("{path}.level"), format!("must be at least 1, got {k}")));
                    }
                }
                fraction("quorum", quorum)
            }
            CheckSpec::Doob { factor, quorum } => {
                positive("factor", factor)?;
                fraction("quorum", quorum)
            }
            CheckSpec::DriftFit {
                x_min,
                x_max,
                beta_tolerance,
                rho_tolerance,
                ..
            } => {
                positive("x_min", x_min)?;
                positive("x_max", x_max)?;
                positive("beta_tolerance", beta_tolerance)?;
                positive("rho_tolerance", rho_tolerance)?;
                if let (Some(lo), Some(hi)) = (x_min, x_max) {
                    if lo >= hi {
                        return Err(Error::config(format!("{path}.x_max"), "must exceed x_min"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Checks run when a config lists none.
    pub fn defaults_for(model: &ModelSpec) -> Vec<CheckSpec> {
        let lln = CheckSpec::Lln { tolerance: None };
        let exponent = CheckSpec::EscapeExponent { tolerance: None };
        let upper = CheckSpec::UpperBound { eps: None, quorum: None };
        let transience = CheckSpec::Transience { level: None, quorum: None };
        match model {
            ModelSpec::Bd(_) => vec![lln, exponent, upper, transience],
            ModelSpec::Osc(_) => vec![
                CheckSpec::Bracket { slack: None, quorum: None },
                exponent,
                upper,
                transience,
            ],
            ModelSpec::Rd(_) => vec![CheckSpec::RdNormDirection { tolerance: None }, exponent],
            ModelSpec::Halfline(_) | ModelSpec::Hidden(_) => vec![lln, exponent, upper],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub engine: EnsembleConfig,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Renders a serde path (`checks[1].quorum`, `model.beta`) for messages.
fn render_path(p: &serde_path_to_error::Path) -> String {
    let s = p.to_string();
    if s == "." {
        "<root>".to_string()
    } else {
        s
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = render_path(e.path());
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.engine.validate(&self.model)?;
        for (i, c) in self.checks.iter().enumerate() {
            c.validate(&format!("checks[{i}]"))?;
            let needs_rd = matches!(c, CheckSpec::RdNormDirection { .. });
            if needs_rd != matches!(self.model, ModelSpec::Rd(_)) && needs_rd {
                return Err(Error::config(
                    format!("checks[{i}].name"),
                    "rd_norm_direction requires an rd model",
                ));
            }
            if matches!(c, CheckSpec::Doob { .. }) && !self.model.has_exact_drift() {
                return Err(Error::config(
                    format!("checks[{i}].name"),
                    format!("doob requires a model with exact drift, not '{}'", self.model.type_name()),
                ));
            }
        }
        if self.output.formats.is_empty() {
            return Err(Error::config("output.formats", "must name at least one of json, csv"));
        }
        Ok(())
    }

    /// Checks to run: the configured list, or the model's defaults.
    pub fn effective_checks(&self) -> Vec<CheckSpec> {
        if self.checks.is_empty() {
            CheckSpec::defaults_for(&self.model)
        } else {
            self.checks.clone()
        }
    }

    /// Engine settings with the recording flags the checks need switched on.
    pub fn effective_engine(&self) -> EnsembleConfig {
        let mut e = self.engine.clone();
        for c in self.effective_checks() {
            match c {
                CheckSpec::Doob { .. } => e.record_doob = true,
                CheckSpec::DriftFit { .. } => e.record_transitions = true,
                _ => {}
            }
        }
        e
    }

    /// SHA-256 over the experiment definition (model, engine, checks); the
    /// output location does not enter the hash.
    pub fn hash(&self) -> String {
        let body = serde_json::to_string(&(&self.model, &self.engine, &self.checks))
            .expect("config serializes");
        let digest = Sha256::digest(body.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
