use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] spinbound_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{label} = {value:e} lies below the lower bound {lower:e} at param {param}")]
    Ordering {
        label: String,
        param: f64,
        value: f64,
        lower: f64,
    },
}

impl CliError {
    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        CliError::Spec(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 invalid spec, 3 numerical failure, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Ordering { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
