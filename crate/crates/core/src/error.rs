use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("format error{}: {message}", row.map(|r| alloc::format!(" at row {r}")).unwrap_or_default())]
    Format { row: Option<usize>, message: String },
    #[error("schema hash mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(context: &'static str, expected: usize, found: usize) -> Self {
        Error::Shape {
            context,
            expected,
            found,
        }
    }

    /// Short machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Shape { .. } => "shape-error",
            Error::ContractViolation(_) => "contract-violation",
            Error::InvalidState(_) => "invalid-state",
            Error::Divergence(_) => "training-divergence",
            Error::Format { .. } => "format-error",
            Error::SchemaMismatch { .. } => "schema-hash-mismatch",
        }
    }
}
