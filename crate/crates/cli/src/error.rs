use std::path::PathBuf;

use gcb_core::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Usage(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("output differs from the golden for case `{0}`")]
    GoldenMismatch(String),
}

impl CliError {
    /// 2 for exceeded caps, 3 for unreadable or malformed input, 4 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::CapExceeded { .. }) => 2,
            CliError::Core(
                Error::Parse { .. }
                | Error::LengthMismatch { .. }
                | Error::InvalidNfg(_)
                | Error::UnknownEdge(_)
                | Error::UnknownFactor(_)
                | Error::OutOfAlphabet { .. }
                | Error::InvalidChannel(_)
                | Error::InvalidCover(_)
                | Error::ShapeMismatch(_),
            )
            | CliError::Io { .. }
            | CliError::Usage(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Core(_) | CliError::GoldenMismatch(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
