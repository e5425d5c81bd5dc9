use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid array, lattice or link configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller violated an operation's precondition (dimensions, normalization).
    #[error("contract error: {0}")]
    Contract(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// The angle distribution puts (almost) no mass on the propagating disk.
    #[error("degenerate spectrum: total variance {total:e} before normalization")]
    DegenerateSpectrum { total: f64 },

    #[error("parse error at `{path}`: {reason}")]
    Parse { path: String, reason: String },

    #[error("unknown scenario `{name}` (valid: {valid})")]
    UnknownPreset { name: String, valid: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
