use thiserror::Error;

/// Errors raised across the crate.
///
/// `Input` and `Parameter` are caller mistakes, `Capability` marks requests
/// that are well-formed but exceed what a desk-scale routine supports.
#[derive(Debug, Error)]
pub enum CrsError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unsupported: {0}")]
    Capability(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CrsError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        CrsError::Input(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        CrsError::Parameter(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        CrsError::Capability(msg.into())
    }

    /// Process exit code used by the CLI for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CrsError::Capability(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CrsError> = std::result::Result<T, E>;
