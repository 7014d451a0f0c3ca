#![allow(dead_code)]

use pca_costlab::linalg::{
    bidiag_svd, bidiagonalize, qr_decompose, FlopCounter, DEFAULT_MAX_SWEEPS, DEFAULT_TOL,
};
use pca_costlab::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Entries uniform in [-1, 1).
pub fn uniform(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).max_abs()
}

/// Distance of `Q'Q` from the identity.
pub fn orthonormality_error(q: &Matrix) -> f64 {
    max_abs_diff(&q.transpose().mul(q), &Matrix::identity(q.cols()))
}

/// Full thin SVD `A = U diag(s) V'` through the library kernels.
pub fn thin_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let mut fc = FlopCounter::new();
    let (q, r) = qr_decompose(a, &mut fc).unwrap();
    let (u1, b, v1) = bidiagonalize(&r, &mut fc).unwrap();
    let s = bidiag_svd(&b, DEFAULT_TOL, DEFAULT_MAX_SWEEPS, &mut fc).unwrap();
    (q.mul(&u1).mul(&s.u), s.sigma, v1.transpose().mul(&s.v))
}

pub fn scale_cols(m: &Matrix, s: &[f64]) -> Matrix {
    let mut out = m.clone();
    for (j, &v) in s.iter().enumerate() {
        out.scale_col(j, v);
    }
    out
}

/// Largest entry of `b` off the diagonal and first superdiagonal.
pub fn off_bidiagonal(b: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            if j != i && j != i + 1 {
                worst = worst.max(b[(i, j)].abs());
            }
        }
    }
    worst
}
