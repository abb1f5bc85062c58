use thiserror::Error;

/// Which end of the radial integration an exponent check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Zero,
    Infinity,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Endpoint::Zero => write!(f, "k -> 0"),
            Endpoint::Infinity => write!(f, "k -> infinity"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("divergent integral `{what}` at {end}: radial integrand exponent {exponent}")]
    Divergent {
        what: &'static str,
        end: Endpoint,
        exponent: f64,
    },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("zero mode undefined: exponent at zero {exponent} < 0")]
    ZeroModeUndefined { exponent: f64 },

    #[error("direction rejected as {class}: {reason}")]
    Rejected { class: &'static str, reason: String },

    #[error("inconsistent handles: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
