//! Dense linear-algebra kernels with explicit flop accounting.

mod bidiag;
mod eigen;
mod flops;
mod givens;
mod matrix;
pub mod ops;

pub use bidiag::{bidiag_svd, bidiagonalize, SvdResult};
pub use eigen::{sym_eig, EigenPairs};
pub use flops::FlopCounter;
pub use givens::{givens, qr_decompose, qr_decompose_partitioned, GivensRotation};
pub use matrix::Matrix;
pub use ops::{matmul, mean_center};

/// Default relative tolerance for the iterative solvers.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default sweep budget for the iterative solvers.
pub const DEFAULT_MAX_SWEEPS: usize = 100;
