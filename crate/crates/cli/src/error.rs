use std::path::PathBuf;

/// Errors with the process exit code they map to: 1 for anything the
/// user can fix in their input, 2 for failures during the run.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{what}: {reason}")]
    Usage { what: String, reason: String },
    #[error("{path}: {reason}")]
    Input { path: PathBuf, reason: String },
    #[error("cannot write {path}: {reason}")]
    Output { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] star_noma::Error),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn usage(what: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Usage {
            what: what.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Input { .. } | CliError::Output { .. } => 1,
            CliError::Core(star_noma::Error::InvalidParameter { .. } | star_noma::Error::Parse(_)) => 1,
            CliError::Core(_) | CliError::Runtime(_) => 2,
        }
    }
}
