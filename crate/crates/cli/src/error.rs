use std::path::Path;

use thiserror::Error;

use drg_core::imaging::ImagingError;
use drg_core::{EngineError, GeometryError};

/// Errors surfaced to the command line, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs.
    #[error("configuration error: {0}")]
    Config(String),
    /// The optimizer or an output write failed.
    #[error("runtime error: {0}")]
    Runtime(String),
    /// `verify` found failing properties.
    #[error("{0} verification properties failed")]
    Verify(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Verify(n) => (2 + *n).min(125) as i32,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<ImagingError> for CliError {
    fn from(e: ImagingError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidConfig(msg) => CliError::Config(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
