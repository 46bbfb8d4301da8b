use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single invalid field in a scenario document.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

fn join_fields(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero channel entry at index {index}: phase is undefined")]
    ZeroChannelEntry { index: usize },

    #[error("dipoles overlap: {0}")]
    OverlappingDipoles(String),

    #[error("quadrature did not converge: achieved error {achieved:.3e} > requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("singular linear system (reciprocal condition estimate {rcond:.3e})")]
    SingularSystem { rcond: f64 },

    #[error("optimizer requires a diagonal Z_SS: {0}")]
    NonDiagonalCoupling(String),

    #[error("invalid scenario: {}", join_fields(.0))]
    Scenario(Vec<FieldError>),

    #[error("scenario `{name}` failed: {source}")]
    ScenarioRun {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
