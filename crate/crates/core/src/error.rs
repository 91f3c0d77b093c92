use std::path::PathBuf;

use thiserror::Error;

use crate::activation::ActivationKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value {value} encountered in {context}")]
    NonFinite { value: f64, context: &'static str },

    #[error("{kind} is not differentiable at x = {x}")]
    NonDifferentiable { kind: ActivationKind, x: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numeric failure in layer {layer}: {detail}")]
    Numeric { layer: usize, detail: String },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("malformed IDX file {}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
