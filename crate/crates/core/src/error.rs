use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: relative asymmetry {0:e}")]
    NotSymmetric(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigen-solver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("eigenvalue {value:e} is below the PSD tolerance {tolerance:e}")]
    NegativeEigenvalue { value: f64, tolerance: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("cell index {index} out of range ({count} cells)")]
    CellOutOfRange { index: usize, count: usize },

    #[error("invalid model configuration: {0}")]
    InvalidModel(String),

    #[error("operator not supported here: {0}")]
    UnsupportedOperator(String),

    #[error("wrong problem kind: expected {expected}, got {got}")]
    WrongProblem { expected: &'static str, got: String },

    #[error("invalid training configuration: {0}")]
    InvalidTraining(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("empty evaluation grid")]
    EmptyGrid,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
