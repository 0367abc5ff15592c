use std::fmt;
use std::path::PathBuf;

/// A config problem, located by the dotted path of the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn syntax(message: String) -> Self {
        Self::new("<document>", message.trim_end().to_string())
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("config error at {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sampler(#[from] abc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("refusing to emit: {0}")]
    InvalidBundle(String),
    #[error("manifest mismatch: {0}")]
    Manifest(String),
}

impl EngineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for config errors, 3 for an exhausted budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Sampler(abc_core::Error::BudgetExhausted { .. }) => 3,
            _ => 1,
        }
    }
}
