use thiserror::Error;

/// Errors produced by the descriptor toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample position ({x}, {y}) outside image of size {width}x{height}")]
    OutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("point outside camera model domain: {0}")]
    ModelDomain(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("descriptor has no stability mask")]
    MissingMask,

    #[error("descriptor sets mix masked and unmasked descriptors")]
    MixedMasks,

    #[error("test selection reached {achieved} of {target} tests before the correlation threshold exceeded 1.0")]
    TargetUnreachable { achieved: usize, target: usize },

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }

    /// True for errors caused by malformed or unreadable input files.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
