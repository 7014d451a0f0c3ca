use std::ops::Range;

use super::{FlopCounter, Matrix};
use crate::error::{invalid, Result};

/// Plane rotation acting on index pair `(i, j)`, `i < j`:
///
/// ```text
/// x_i' =  c*x_i + s*x_j
/// x_j' = -s*x_i + c*x_j
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GivensRotation {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: f64,
}

/// Coefficients `(c, s, r)` with `c*a + s*b = r` and `-s*a + c*b = 0`.
///
/// `b == 0` yields the identity rotation and `r = a`.
pub fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0, a);
    }
    let r = a.hypot(b);
    (a / r, b / r, r)
}

fn count_givens(fc: &mut FlopCounter) {
    // hypot as two squares, one add and a root; two divisions
    fc.mul(2);
    fc.add(1);
    fc.div_sqrt(3);
}

impl GivensRotation {
    pub fn new(i: usize, j: usize, a: f64, b: f64) -> (Self, f64) {
        debug_assert!(i < j);
        let (c, s, r) = givens(a, b);
        (GivensRotation { i, j, c, s }, r)
    }

    pub fn is_identity(&self) -> bool {
        self.c == 1.0 && self.s == 0.0
    }

    /// Rotates rows `i` and `j` of `m`, touching columns `cols` only.
    pub fn rotate_rows(&self, m: &mut Matrix, cols: Range<usize>, fc: &mut FlopCounter) {
        let n = cols.len() as u64;
        let (ri, rj) = m.two_rows_mut(self.i, self.j);
        for k in cols {
            let (x, y) = (ri[k], rj[k]);
            ri[k] = self.c * x + self.s * y;
            rj[k] = -self.s * x + self.c * y;
        }
        fc.mul(4 * n);
        fc.add(2 * n);
    }

    /// Applies the transposed rotation to rows `i` and `j`.
    pub fn rotate_rows_transposed(&self, m: &mut Matrix, cols: Range<usize>, fc: &mut FlopCounter) {
        let n = cols.len() as u64;
        let (ri, rj) = m.two_rows_mut(self.i, self.j);
        for k in cols {
            let (x, y) = (ri[k], rj[k]);
            ri[k] = self.c * x - self.s * y;
            rj[k] = self.s * x + self.c * y;
        }
        fc.mul(4 * n);
        fc.add(2 * n);
    }

    /// Rotates columns `i` and `j` of `m` (right multiplication by the
    /// transposed rotation), touching rows `rows` only.
    pub fn rotate_cols(&self, m: &mut Matrix, rows: Range<usize>, fc: &mut FlopCounter) {
        let n = rows.len() as u64;
        for r in rows {
            let (x, y) = (m[(r, self.i)], m[(r, self.j)]);
            m[(r, self.i)] = self.c * x + self.s * y;
            m[(r, self.j)] = -self.s * x + self.c * y;
        }
        fc.mul(4 * n);
        fc.add(2 * n);
    }
}

/// Thin QR of a tall matrix by Givens rotations.
///
/// Returns `Q` (rows×cols, orthonormal columns) and `R` (cols×cols, upper
/// triangular with non-negative diagonal).
pub fn qr_decompose(z: &Matrix, fc: &mut FlopCounter) -> Result<(Matrix, Matrix)> {
    let rows = z.rows();
    qr_decompose_partitioned(
        z,
        std::slice::from_ref(&(0..rows)),
        std::slice::from_mut(fc),
    )
}

/// [`qr_decompose`] with flops booked per row block: a rotation of rows
/// `(i-1, i)` is charged to the block owning row `i`. The arithmetic does not
/// depend on the partition.
pub fn qr_decompose_partitioned(
    z: &Matrix,
    parts: &[Range<usize>],
    counters: &mut [FlopCounter],
) -> Result<(Matrix, Matrix)> {
    let (n, m) = z.shape();
    if n < m {
        return invalid(format!("qr_decompose needs rows >= cols, got {n}x{m}"));
    }
    if m == 0 {
        return invalid("qr_decompose of a matrix with no columns");
    }
    debug_assert_eq!(parts.len(), counters.len());
    let mut owner = vec![0usize; n];
    for (w, p) in parts.iter().enumerate() {
        owner[p.clone()].fill(w);
    }

    let mut work = z.clone();
    let mut rotations = Vec::new();
    // column by column, bottom-up: zero work[i][j] against work[i-1][j]
    for j in 0..m {
        for i in (j + 1..n).rev() {
            let b = work[(i, j)];
            if b == 0.0 {
                continue;
            }
            let fc = &mut counters[owner[i]];
            let (g, r) = GivensRotation::new(i - 1, i, work[(i - 1, j)], b);
            count_givens(fc);
            work[(i - 1, j)] = r;
            work[(i, j)] = 0.0;
            g.rotate_rows(&mut work, j + 1..m, fc);
            rotations.push(g);
        }
    }

    // Q = G_1' G_2' ... G_r' [I; 0]
    let mut q = Matrix::zeros(n, m);
    for k in 0..m {
        q[(k, k)] = 1.0;
    }
    for g in rotations.iter().rev() {
        g.rotate_rows_transposed(&mut q, 0..m, &mut counters[owner[g.j]]);
    }

    let mut r = Matrix::zeros(m, m);
    for i in 0..m {
        r.row_mut(i)[i..].copy_from_slice(&work.row(i)[i..]);
    }
    for k in 0..m {
        if r[(k, k)] < 0.0 {
            for v in &mut r.row_mut(k)[k..] {
                *v = -*v;
            }
            q.scale_col(k, -1.0);
        }
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orth_err(q: &Matrix) -> f64 {
        q.transpose()
            .mul(q)
            .sub(&Matrix::identity(q.cols()))
            .frobenius_norm()
    }

    #[test]
    fn givens_examples() {
        assert_eq!(givens(1.0, 0.0), (1.0, 0.0, 1.0));

        let (c, s, r) = givens(3.0, 4.0);
        assert!((r.abs() - 5.0).abs() < 1e-15);
        assert!((c - 0.6).abs() < 1e-15 && (s.abs() - 0.8).abs() < 1e-15);
        assert!((-s * 3.0 + c * 4.0).abs() < 1e-15);

        let (c, s, r) = givens(0.0, 2.0);
        assert!((r.abs() - 2.0).abs() < 1e-15);
        assert_eq!(c, 0.0);
        assert!((s.abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn givens_is_overflow_safe() {
        let (c, s, r) = givens(1e300, 1e300);
        assert!(r.is_finite());
        assert!((c * c + s * s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qr_identity() {
        let (q, r) = qr_decompose(&Matrix::identity(3), &mut FlopCounter::new()).unwrap();
        assert_eq!(q, Matrix::identity(3));
        assert_eq!(r, Matrix::identity(3));
    }

    #[test]
    fn qr_permutation() {
        let z = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (q, r) = qr_decompose(&z, &mut FlopCounter::new()).unwrap();
        assert!(orth_err(&q) < 1e-15);
        assert!(q.mul(&r).sub(&z).frobenius_norm() < 1e-15);
        assert_eq!(r[(1, 0)], 0.0);
        assert!(r[(0, 0)] > 0.0 && r[(1, 1)] > 0.0);
        for v in q.data() {
            assert!(v.abs() < 1e-15 || (v.abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn qr_rejects_wide() {
        assert!(qr_decompose(&Matrix::zeros(2, 3), &mut FlopCounter::new()).is_err());
    }

    #[test]
    fn qr_partitioned_matches_and_charges_owners() {
        let z = Matrix::from_vec(9, 3, (0..27).map(|i| (i as f64 * 0.7).cos()).collect()).unwrap();
        let mut one = FlopCounter::new();
        let (q1, r1) = qr_decompose(&z, &mut one).unwrap();
        let mut cs = vec![FlopCounter::new(); 3];
        let (q3, r3) = qr_decompose_partitioned(&z, &[0..3, 3..6, 6..9], &mut cs).unwrap();
        assert_eq!(q1.data(), q3.data());
        assert_eq!(r1.data(), r3.data());
        let mut sum = FlopCounter::new();
        for c in &cs {
            assert!(c.total() > 0);
            sum += *c;
        }
        assert_eq!(sum, one);
    }
}
