use thiserror::Error;

/// Errors produced by the kernels, PCA methods, simulator and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative solver ran out of sweeps. `residual` is the off-diagonal
    /// (or superdiagonal) Frobenius norm left when it stopped.
    #[error("{solver} did not converge after {sweeps} sweeps (residual {residual:e})")]
    Convergence {
        solver: &'static str,
        sweeps: usize,
        residual: f64,
    },

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A sweep point failed; `point` names the axis value or the base point.
    #[error("sweep point {point} failed: {source}")]
    SweepPoint { point: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
