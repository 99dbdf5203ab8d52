use thiserror::Error;

use workbench_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for `{key}`: {message}")]
    Usage { key: String, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn usage(key: &str, message: impl Into<String>) -> Self {
        CliError::Usage { key: key.to_string(), message: message.into() }
    }

    /// Attributes a core error caused by a configured value to its key.
    pub fn at(key: &str) -> impl FnOnce(CoreError) -> CliError + '_ {
        move |e| match e {
            CoreError::InvariantViolation(_) | CoreError::Precision(_) | CoreError::ResourceLimit(_) => CliError::Core(e),
            other => CliError::usage(key, other.to_string()),
        }
    }

    /// 1 usage, 2 invariant violation, 3 precision or resource limit.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Io { .. } => 1,
            CliError::Invariant(_) => 2,
            CliError::Core(e) => match e {
                CoreError::InvariantViolation(_) => 2,
                CoreError::Precision(_) | CoreError::ResourceLimit(_) => 3,
                _ => 1,
            },
        }
    }
}
