use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the spectral pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A Levinson/Schur reflection coefficient reached the unit circle.
    #[error("matrix is not positive definite (step {step}, |reflection| = {reflection:.3e})")]
    NotPositiveDefinite { step: usize, reflection: f64 },

    /// The moment matrix supports orthogonal polynomials only up to `max_degree`.
    #[error("polynomial basis degenerates beyond degree {max_degree}")]
    BasisDegenerate { max_degree: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("trajectory diverged at sample {sample} (|x| = {norm:.3e})")]
    Divergence { sample: usize, norm: f64 },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
