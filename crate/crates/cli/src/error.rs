use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config: {0}")]
    Invalid(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: covfield_core::Error,
    },

    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },

    #[error("output directory {0} is in use by another run (delete its .covfield.lock if that run is gone)")]
    Locked(PathBuf),

    #[error("manifest check failed: {0}")]
    Manifest(String),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for file
    /// system and manifest problems, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Invalid(_) => 2,
            CliError::Io { .. } | CliError::Locked(_) | CliError::Manifest(_) => 3,
            CliError::Core { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            msg: e.to_string(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Attaches a description of the step that failed to core errors.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for covfield_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}
