use std::path::PathBuf;

use vqaudit_core::Error as CoreError;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

/// Everything a command can fail with. Each variant maps to a distinct
/// process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("bad config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    /// Also what clap exits with on unknown flags.
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const FORMAT: i32 = 4;
    pub const SCHEMA_MISMATCH: i32 = 5;
    pub const INVALID_ARGUMENT: i32 = 6;
    pub const DIVERGENCE: i32 = 7;
    pub const IO: i32 = 8;
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        AppError::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn config(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        AppError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Core(e) => e.kind(),
            AppError::Config { .. } => "config-error",
            AppError::Format { .. } => "format-error",
            AppError::Io { .. } => "io-error",
            AppError::Usage(_) => "usage-error",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Core(e) => match e {
                CoreError::InvalidArgument(_) => exit::INVALID_ARGUMENT,
                CoreError::Format { .. } => exit::FORMAT,
                CoreError::SchemaMismatch { .. } => exit::SCHEMA_MISMATCH,
                CoreError::Divergence(_) => exit::DIVERGENCE,
                CoreError::Shape { .. } | CoreError::ContractViolation(_) | CoreError::InvalidState(_) => {
                    exit::INTERNAL
                }
            },
            AppError::Config { .. } => exit::CONFIG,
            AppError::Format { .. } => exit::FORMAT,
            AppError::Io { .. } => exit::IO,
            AppError::Usage(_) => exit::USAGE,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}
