use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the command-line exit codes: input and domain
/// problems exit with 2, numerical failures with 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input (wrong shape, non-finite numbers, unparsable files).
    #[error("input error: {0}")]
    Input(String),
    /// A mathematical precondition is violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative method failed to converge or a factorization broke down.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The requested model is outside what the simulators support.
    #[error("unsupported model: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
