use thiserror::Error;

/// Errors raised by the simulator.
///
/// The variants map onto the command-line exit codes: `Domain` and
/// `Validation` are input problems, `Singular` is a numerical breakdown of a
/// closed form, `Verification` is a failed cross-check.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("grid too coarse: {msg} (need at least {required} samples)")]
    Grid { msg: String, required: usize },
    #[error("fit did not converge after {iterations} iterations (best rms {best_rms:.3e})")]
    NoConvergence {
        iterations: usize,
        best_rms: f64,
        best: Vec<(f64, f64)>,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Validation(_) | Error::Io(_) => 2,
            Error::Singular(_) | Error::Grid { .. } | Error::NoConvergence { .. } => 3,
            Error::Verification(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
