//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the registration pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a precondition (non-finite coordinates, empty
    /// cloud where points are required, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input is structurally valid but degenerate for the requested
    /// operation (too few correspondences, collinear points, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A configuration value is out of range or inconsistent.
    #[error("configuration: {0}")]
    Config(String),

    /// Matrix/tensor dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A computation produced NaN or otherwise lost numerical meaning.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An error from a named pipeline stage.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed file contents (PLY, JSON, sidecar formats).
    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// Wraps an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Exit code category used by the command line tools: 2 for usage/IO
    /// problems, 1 for pipeline failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse(_) | Error::Config(_) => 2,
            Error::Stage { source, .. } => source.exit_code().min(1),
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
