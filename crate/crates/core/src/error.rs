use thiserror::Error;

use crate::phase::BracketBackend;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies within the pole guard of a singular point.
    #[error("{function}: argument {arg} is within {distance:.3e} of a pole (guard {guard:.1e})")]
    PoleProximity {
        function: &'static str,
        arg: String,
        distance: f64,
        guard: f64,
    },

    #[error("{function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    #[error("{function}: series did not converge within {cap} terms (last term {last:.3e})")]
    Accuracy {
        function: &'static str,
        cap: usize,
        last: f64,
    },

    #[error("{function}: quasi-periodic growth exponent {exponent:.1} exceeds the representable range")]
    Overflow { function: &'static str, exponent: f64 },

    #[error("invalid elliptic parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigensolver failed to converge for a {0}x{0} matrix")]
    Eigen(usize),

    #[error("backend {backend:?} requires a spin block on the phase point")]
    MissingSpin { backend: BracketBackend },

    #[error("analytic derivatives requested but the field provides none")]
    NoAnalyticDerivative,

    #[error("integration aborted at t = {t:.6}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("model {model}: {reason}")]
    Model { model: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            function,
            reason: reason.into(),
        }
    }

    pub(crate) fn model(model: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Model {
            model: model.into(),
            reason: reason.into(),
        }
    }
}
