use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside the domain of the quantity requested.
    #[error("{name}: {reason}, got {value}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Configuration failed to parse or validate; `path` is dotted (`model.beta`).
    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("insufficient data for {what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("degenerate fit: {0}")]
    FitDegenerate(String),

    /// An operation was requested for a model or record set that cannot support it.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("memory budget exceeded: {requested} recorded samples requested, budget is {budget}")]
    ResourceLimit { requested: u64, budget: u64 },

    #[error("interrupted after {completed} of {total} trajectories")]
    Interrupted { completed: usize, total: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
