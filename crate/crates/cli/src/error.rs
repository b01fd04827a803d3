use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: creditworks::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        use creditworks::Error as E;
        match self {
            CliError::Usage(_) => 64,
            CliError::Io { .. } => 2,
            CliError::Core { source, .. } => match source {
                E::SingleClass => 3,
                E::ColumnMismatch(_) | E::DimensionMismatch { .. } => 4,
                E::MissingExposureColumn(_) => 5,
                _ => 2,
            },
        }
    }
}

/// Attaches a file or step name to core errors.
pub trait Context<T> {
    fn context(self, what: impl std::fmt::Display) -> Result<T, CliError>;
}

impl<T> Context<T> for creditworks::Result<T> {
    fn context(self, what: impl std::fmt::Display) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what.to_string(),
            source,
        })
    }
}
