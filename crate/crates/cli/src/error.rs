use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    /// A certified inequality or hypothesis check failed.
    pub const CERTIFIED_FAILURE: u8 = 1;
    pub const VALIDATION: u8 = 2;
    /// Divergence, no radius bracket, or no usable contraction trial.
    pub const NUMERICAL: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid config: {field}: {reason}")]
    Field { field: &'static str, reason: String },

    #[error("{}:{line}: {message}", path.display())]
    Ensemble { path: PathBuf, line: u64, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] qmn::Error),
}

impl CliError {
    pub(crate) fn field(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Field {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if is_numerical(e) => exit::NUMERICAL,
            _ => exit::VALIDATION,
        }
    }
}

pub(crate) fn is_numerical(e: &qmn::Error) -> bool {
    matches!(
        e,
        qmn::Error::NoRadiusInScanRange | qmn::Error::Diverged { .. } | qmn::Error::AllTrialsDegenerate { .. }
    )
}
