use std::path::PathBuf;

use crate::providers::ProviderError;

#[derive(Debug, thiserror::Error)]
pub enum TwinError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("missing input from stage `{stage}`: {path} (run `twin {stage}` first)")]
    MissingStage { stage: &'static str, path: PathBuf },
    #[error(transparent)]
    Core(#[from] twin_core::Error),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("{context}: {source}")]
    ProviderContext {
        context: String,
        #[source]
        source: ProviderError,
    },
    #[error("{0}")]
    Other(String),
}

impl TwinError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TwinError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for provider failures, 1 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            TwinError::Provider(_) | TwinError::ProviderContext { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, TwinError>;
