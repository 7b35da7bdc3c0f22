//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Mesh construction or admissibility violation.
    #[error("inadmissible mesh: {0}")]
    Mesh(String),

    /// Bad argument to a numerical routine (wrong length, nonpositive
    /// diffusion, nonfinite value, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Direct or iterative linear solve failed.
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// Picard iteration exhausted its budget.
    #[error(
        "Picard iteration did not converge in {max_iter} iterations \
         (last relative update {last_update:.3e})"
    )]
    NoConvergence { max_iter: usize, last_update: f64 },

    /// Run configuration file problem.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
