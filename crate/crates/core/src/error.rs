use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("position {x_nm} nm lies outside the tabulated potential domain")]
    OutOfDomain { x_nm: f64 },

    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("scale hierarchy violated ({0}); required r_N < u1 < a_TF < channel spacing")]
    ScaleHierarchy(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimate {value:e} with error {error:e} after {intervals} intervals")]
    Quadrature {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        intervals: usize,
    },

    #[error("divergent quantity: {0}")]
    Divergence(String),

    #[error("integrator step {dz_nm} nm exceeds the stability bound {bound_nm} nm")]
    Stability { dz_nm: f64, bound_nm: f64 },

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::Config { .. } => "config",
            Error::ScaleHierarchy(_) => "scale_hierarchy",
            Error::Quadrature { .. } => "quadrature",
            Error::Divergence(_) => "divergence",
            Error::Stability { .. } => "stability",
            Error::Statistics(_) => "statistics",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
