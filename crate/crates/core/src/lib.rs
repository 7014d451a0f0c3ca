//! Principal component analysis by four methods, instrumented for flop and
//! intermediate-data accounting.
//!
//! * [`linalg`]: counted dense kernels (Givens QR, bidiagonalization,
//!   bidiagonal SVD, Jacobi eigensolver).
//! * [`pca`]: covariance eigendecomposition, QR + bidiagonal SVD, stochastic
//!   SVD and probabilistic PCA by EM.
//! * [`sim`]: phase-based distributed execution ledger.
//! * [`harness`]: synthetic data, matrix files, experiment configs and sweeps.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod pca;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::Matrix;
