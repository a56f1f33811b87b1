use std::path::PathBuf;

use coflow_core::coflow::FlowError;
use coflow_core::forms::FormError;
use coflow_core::soliton::SolitonError;

/// Exit status 2 for configuration errors, 1 for everything else.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<FormError> for CliError {
    fn from(e: FormError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<SolitonError> for CliError {
    fn from(e: SolitonError) -> Self {
        match e {
            SolitonError::InvalidParams(_) | SolitonError::NoBracket { .. } => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidConfig(_)
            | FlowError::StructureMismatch { .. }
            | FlowError::NonConstantWarp { .. }
            | FlowError::InitialConstraint { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}
