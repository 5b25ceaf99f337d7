use thiserror::Error;

/// Errors produced by generators, solvers, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The Gram matrix of the measurement rows is not positive definite,
    /// so the affine projection cannot be formed.
    #[error(
        "singular ensemble: the m x m Gram matrix of the measurement rows is not positive definite"
    )]
    SingularEnsemble,

    #[error("malformed instance file: {0}")]
    MalformedInstance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid<S: Into<String>>(msg: S) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
