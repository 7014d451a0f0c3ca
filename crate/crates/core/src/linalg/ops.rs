//! Counted dense kernels.
//!
//! The row-range kernels (`*_rows`, `*_accumulate`) are the building blocks of
//! the PCA methods: every reduction walks rows in ascending order into a single
//! accumulator, so splitting a row range into consecutive pieces and calling the
//! kernel once per piece produces bit-identical output to one call over the
//! whole range.

use std::ops::Range;

use super::{FlopCounter, Matrix};
use crate::error::{invalid, Error, Result};

/// Adds the column sums of `a[rows]` into `acc`.
pub fn column_sums_accumulate(
    a: &Matrix,
    rows: Range<usize>,
    acc: &mut [f64],
    fc: &mut FlopCounter,
) {
    debug_assert_eq!(acc.len(), a.cols());
    let n = rows.len() as u64;
    for r in rows {
        for (s, &v) in acc.iter_mut().zip(a.row(r)) {
            *s += v;
        }
    }
    fc.add(n * a.cols() as u64);
}

/// Writes `a[rows] - mean` into the same rows of `out`.
pub fn center_rows(
    a: &Matrix,
    mean: &[f64],
    rows: Range<usize>,
    out: &mut Matrix,
    fc: &mut FlopCounter,
) {
    let n = rows.len() as u64;
    for r in rows {
        for ((o, &v), &m) in out.row_mut(r).iter_mut().zip(a.row(r)).zip(mean) {
            *o = v - m;
        }
    }
    fc.add(n * a.cols() as u64);
}

/// Subtracts the column means from every row.
pub fn mean_center(a: &Matrix, fc: &mut FlopCounter) -> Result<(Matrix, Vec<f64>)> {
    if a.is_empty() {
        return invalid("cannot mean-center an empty matrix");
    }
    let mut sums = vec![0.0; a.cols()];
    column_sums_accumulate(a, 0..a.rows(), &mut sums, fc);
    let mean = means_from_sums(&sums, a.rows(), fc);
    let mut centered = Matrix::zeros(a.rows(), a.cols());
    center_rows(a, &mean, 0..a.rows(), &mut centered, fc);
    Ok((centered, mean))
}

pub(crate) fn means_from_sums(sums: &[f64], n: usize, fc: &mut FlopCounter) -> Vec<f64> {
    fc.div_sqrt(sums.len() as u64);
    sums.iter().map(|s| s / n as f64).collect()
}

/// Exact triple-loop product `a * b`.
pub fn matmul(a: &Matrix, b: &Matrix, fc: &mut FlopCounter) -> Result<Matrix> {
    if a.cols() != b.rows() {
        return invalid(format!(
            "matmul shape mismatch: {}x{} * {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        ));
    }
    let mut out = Matrix::zeros(a.rows(), b.cols());
    matmul_rows(a, b, 0..a.rows(), &mut out, fc);
    Ok(out)
}

/// Fills rows `rows` of `out` with `a[rows] * b`.
pub fn matmul_rows(
    a: &Matrix,
    b: &Matrix,
    rows: Range<usize>,
    out: &mut Matrix,
    fc: &mut FlopCounter,
) {
    debug_assert_eq!(a.cols(), b.rows());
    debug_assert_eq!(out.cols(), b.cols());
    let n = rows.len() as u64;
    for i in rows {
        let o = out.row_mut(i);
        o.fill(0.0);
        for (k, &aik) in a.row(i).iter().enumerate() {
            for (oj, &bkj) in o.iter_mut().zip(b.row(k)) {
                *oj += aik * bkj;
            }
        }
    }
    fc.fma(n * a.cols() as u64 * b.cols() as u64);
}

/// `acc += a[rows]' * b[rows]`, with `a` N×m, `b` N×k and `acc` m×k.
pub fn at_b_accumulate(
    a: &Matrix,
    b: &Matrix,
    rows: Range<usize>,
    acc: &mut Matrix,
    fc: &mut FlopCounter,
) {
    debug_assert_eq!(a.rows(), b.rows());
    debug_assert_eq!(acc.shape(), (a.cols(), b.cols()));
    let n = rows.len() as u64;
    for r in rows {
        let br = b.row(r);
        for (i, &ari) in a.row(r).iter().enumerate() {
            for (o, &brj) in acc.row_mut(i).iter_mut().zip(br) {
                *o += ari * brj;
            }
        }
    }
    fc.fma(n * a.cols() as u64 * b.cols() as u64);
}

/// `a' * b` over all rows.
pub fn at_b(a: &Matrix, b: &Matrix, fc: &mut FlopCounter) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return invalid(format!(
            "transpose-product shape mismatch: ({}x{})' * {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        ));
    }
    let mut acc = Matrix::zeros(a.cols(), b.cols());
    at_b_accumulate(a, b, 0..a.rows(), &mut acc, fc);
    Ok(acc)
}

/// Unnormalized covariance `a' * a`, stored as a full dense block.
pub fn gram(a: &Matrix, fc: &mut FlopCounter) -> Matrix {
    let mut acc = Matrix::zeros(a.cols(), a.cols());
    at_b_accumulate(a, a, 0..a.rows(), &mut acc, fc);
    acc
}

/// `a * b'` for small driver-side products.
pub fn a_bt(a: &Matrix, b: &Matrix, fc: &mut FlopCounter) -> Matrix {
    debug_assert_eq!(a.cols(), b.cols());
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        let ai = a.row(i);
        for j in 0..b.rows() {
            out[(i, j)] = ai.iter().zip(b.row(j)).map(|(x, y)| x * y).sum();
        }
    }
    fc.fma((a.rows() * b.rows() * a.cols()) as u64);
    out
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &Matrix, fc: &mut FlopCounter) -> Result<Matrix> {
    let n = m.rows();
    if m.cols() != n {
        return invalid("spd_inverse needs a square matrix");
    }
    // lower-triangular factor L with m = L L'
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        fc.fma(j as u64);
        if !diag.is_finite() || diag <= 0.0 {
            return Err(Error::Degenerate(format!(
                "matrix not positive definite (pivot {j} = {diag:e})"
            )));
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        fc.div_sqrt(1);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / ljj;
        }
        fc.fma(((n - j - 1) * j) as u64);
        fc.div_sqrt((n - j - 1) as u64);
    }
    // solve L L' X = I column by column
    let mut inv = Matrix::zeros(n, n);
    let mut y = vec![0.0; n];
    for c in 0..n {
        for i in 0..n {
            let mut v = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                v -= l[(i, k)] * y[k];
            }
            y[i] = v / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in i + 1..n {
                v -= l[(k, i)] * inv[(k, c)];
            }
            inv[(i, c)] = v / l[(i, i)];
        }
        fc.fma((n * (n - 1)) as u64);
        fc.div_sqrt(2 * n as u64);
    }
    // exact symmetry
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    fc.fma((n * n.saturating_sub(1) / 2) as u64);
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn mean_center_small() {
        let mut fc = FlopCounter::new();
        let (c, mu) = mean_center(&m(&[&[1.0, 3.0], &[3.0, 5.0]]), &mut fc).unwrap();
        assert_eq!(mu, vec![2.0, 4.0]);
        assert_eq!(c, m(&[&[-1.0, -1.0], &[1.0, 1.0]]));
    }

    #[test]
    fn mean_center_zero_matrix_is_identity() {
        let z = Matrix::zeros(3, 2);
        let (c, mu) = mean_center(&z, &mut FlopCounter::new()).unwrap();
        assert_eq!(mu, vec![0.0, 0.0]);
        assert_eq!(c, z);
    }

    #[test]
    fn mean_center_rejects_empty() {
        assert!(mean_center(&Matrix::zeros(0, 3), &mut FlopCounter::new()).is_err());
    }

    #[test]
    fn matmul_examples() {
        let mut fc = FlopCounter::new();
        let x = m(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        assert_eq!(matmul(&Matrix::identity(3), &x, &mut fc).unwrap(), x);

        let ac = m(&[&[-1.0, -1.0], &[1.0, 1.0]]);
        let g = matmul(&ac.transpose(), &ac, &mut fc).unwrap();
        assert_eq!(g, m(&[&[2.0, 2.0], &[2.0, 2.0]]));
        assert_eq!(g, gram(&ac, &mut fc));

        let p = matmul(&m(&[&[2.0]]), &m(&[&[3.0]]), &mut fc).unwrap();
        assert_eq!(p[(0, 0)], 6.0);
    }

    #[test]
    fn matmul_shape_mismatch() {
        let err = matmul(
            &Matrix::zeros(2, 3),
            &Matrix::zeros(2, 3),
            &mut FlopCounter::new(),
        );
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn matmul_flop_count_is_exact() {
        let mut fc = FlopCounter::new();
        matmul(&Matrix::zeros(4, 5), &Matrix::zeros(5, 7), &mut fc).unwrap();
        assert_eq!(fc.muls, 4 * 5 * 7);
        assert_eq!(fc.adds, 4 * 5 * 7);
        assert_eq!(fc.divs_sqrts, 0);
    }

    #[test]
    fn split_accumulation_is_bit_identical() {
        let a = Matrix::from_vec(
            7,
            3,
            (0..21).map(|i| ((i * 37 % 11) as f64).sin()).collect(),
        )
        .unwrap();
        let mut fc = FlopCounter::new();
        let whole = gram(&a, &mut fc);
        let mut pieces = Matrix::zeros(3, 3);
        for r in [0..2, 2..3, 3..7] {
            at_b_accumulate(&a, &a, r, &mut pieces, &mut fc);
        }
        assert_eq!(whole.data(), pieces.data());
    }

    #[test]
    fn spd_inverse_roundtrip() {
        let s = m(&[&[4.0, 1.0, 0.5], &[1.0, 3.0, 0.2], &[0.5, 0.2, 2.0]]);
        let inv = spd_inverse(&s, &mut FlopCounter::new()).unwrap();
        let e = s.mul(&inv).sub(&Matrix::identity(3)).frobenius_norm();
        assert!(e < 1e-14, "{e}");
        assert!(spd_inverse(&m(&[&[1.0, 2.0], &[2.0, 1.0]]), &mut FlopCounter::new()).is_err());
    }
}
