use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by enhancement, I/O and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tile size {0}: must be even and at least 2")]
    InvalidTileSize(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported bit depth: {0}")]
    UnsupportedDepth(String),

    #[error("unsupported output format: {0}")]
    UnsupportedOutput(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("descriptor file line {line}: {reason}")]
    DescriptorFormat { line: usize, reason: String },

    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("pairs file line {line}: {reason}")]
    ProtocolFormat { line: usize, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
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
