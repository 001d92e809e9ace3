use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator `{label}` is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { label: String, deviation: f64 },

    #[error("operator `{0}` has zero norm")]
    ZeroOperator(String),

    #[error("spectrum is fully degenerate (mean level spacing {0:e})")]
    DegenerateSpectrum(f64),

    #[error("target enumeration would produce {count} targets, cap is {cap}")]
    EnumerationCap { count: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sweep cell (seed {seed}, T = {t}, V = {v}) failed: {source}")]
    Cell {
        seed: u64,
        t: f64,
        v: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("missing inputs: {}", display_paths(.0))]
    MissingInputs(Vec<PathBuf>),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn display_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
