//! Givens bidiagonalization and the implicit-shift bidiagonal SVD.

use super::givens::{givens, GivensRotation};
use super::{FlopCounter, Matrix};
use crate::error::{invalid, Error, Result};

/// Thin singular value decomposition `B = U * diag(sigma) * V'`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

/// Reduces a square matrix to upper bidiagonal form with plane rotations.
///
/// Returns `(U1, B, V1)` with `R = U1 * B * V1`; `V1` is the row-oriented
/// factor, so the right singular vectors of `R` are the columns of
/// `V1' * V2` once `B = U2 * S * V2'` is known.
pub fn bidiagonalize(r: &Matrix, fc: &mut FlopCounter) -> Result<(Matrix, Matrix, Matrix)> {
    let n = r.rows();
    if r.cols() != n {
        return invalid(format!(
            "bidiagonalize needs a square matrix, got {}x{}",
            n,
            r.cols()
        ));
    }
    let mut w = r.clone();
    let mut u1 = Matrix::identity(n);
    let mut v1 = Matrix::identity(n);

    for k in 0..n {
        // column k below the diagonal, bottom-up
        for i in (k + 1..n).rev() {
            let b = w[(i, k)];
            if b == 0.0 {
                continue;
            }
            let (g, rr) = GivensRotation::new(i - 1, i, w[(i - 1, k)], b);
            fc.mul(2);
            fc.add(1);
            fc.div_sqrt(3);
            w[(i - 1, k)] = rr;
            w[(i, k)] = 0.0;
            g.rotate_rows(&mut w, k + 1..n, fc);
            g.rotate_cols(&mut u1, 0..n, fc);
        }
        // row k right of the superdiagonal, right-to-left
        for j in (k + 2..n).rev() {
            let b = w[(k, j)];
            if b == 0.0 {
                continue;
            }
            let (g, rr) = GivensRotation::new(j - 1, j, w[(k, j - 1)], b);
            fc.mul(2);
            fc.add(1);
            fc.div_sqrt(3);
            w[(k, j - 1)] = rr;
            w[(k, j)] = 0.0;
            g.rotate_cols(&mut w, k + 1..n, fc);
            g.rotate_rows(&mut v1, 0..n, fc);
        }
    }
    Ok((u1, w, v1))
}

/// Rotates columns `a` and `b` of `m`: `m_a <- c*m_a + s*m_b`, `m_b <- -s*m_a + c*m_b`.
fn rot_cols(m: &mut Matrix, a: usize, b: usize, c: f64, s: f64, fc: &mut FlopCounter) {
    for r in 0..m.rows() {
        let (x, y) = (m[(r, a)], m[(r, b)]);
        m[(r, a)] = c * x + s * y;
        m[(r, b)] = -s * x + c * y;
    }
    fc.mul(4 * m.rows() as u64);
    fc.add(2 * m.rows() as u64);
}

fn count_rot(fc: &mut FlopCounter) {
    fc.mul(2);
    fc.add(1);
    fc.div_sqrt(3);
}

struct Bidiag<'a> {
    d: Vec<f64>,
    e: Vec<f64>,
    u: Matrix,
    v: Matrix,
    fc: &'a mut FlopCounter,
}

impl Bidiag<'_> {
    /// `d[k] == 0` inside the block: push `e[k]` off the matrix with left
    /// rotations against rows `k+1..=hi`.
    fn chase_row(&mut self, k: usize, hi: usize) {
        let mut f = self.e[k];
        self.e[k] = 0.0;
        for j in k + 1..=hi {
            let (c, s, r) = givens(self.d[j], f);
            count_rot(self.fc);
            self.d[j] = r;
            if j < hi {
                f = -s * self.e[j];
                self.e[j] *= c;
                self.fc.mul(2);
            }
            rot_cols(&mut self.u, j, k, c, s, self.fc);
        }
    }

    /// `d[hi] == 0`: push `e[hi-1]` off the matrix with right rotations
    /// against columns `hi-1` down to `lo`.
    fn chase_col(&mut self, lo: usize, hi: usize) {
        let mut f = self.e[hi - 1];
        self.e[hi - 1] = 0.0;
        for j in (lo..hi).rev() {
            let (c, s, r) = givens(self.d[j], f);
            count_rot(self.fc);
            self.d[j] = r;
            if j > lo {
                f = -s * self.e[j - 1];
                self.e[j - 1] *= c;
                self.fc.mul(2);
            }
            rot_cols(&mut self.v, j, hi, c, s, self.fc);
        }
    }

    /// One implicit-shift QR step on the unreduced block `lo..=hi`.
    fn golub_kahan_step(&mut self, lo: usize, hi: usize) {
        let (d, e) = (&self.d, &self.e);
        // Wilkinson shift from the trailing 2x2 of B'B
        let t11 = d[hi - 1] * d[hi - 1]
            + if hi - 1 > lo {
                e[hi - 2] * e[hi - 2]
            } else {
                0.0
            };
        let t12 = d[hi - 1] * e[hi - 1];
        let t22 = d[hi] * d[hi] + e[hi - 1] * e[hi - 1];
        let delta = 0.5 * (t11 - t22);
        let mu = if t12 == 0.0 {
            t22
        } else {
            let sgn = if delta >= 0.0 { 1.0 } else { -1.0 };
            t22 - t12 * t12 / (delta + sgn * delta.hypot(t12))
        };
        self.fc.mul(9);
        self.fc.add(7);
        self.fc.div_sqrt(2);

        let mut y = d[lo] * d[lo] - mu;
        let mut z = d[lo] * e[lo];
        self.fc.fma(1);
        self.fc.mul(1);
        for k in lo..hi {
            // right rotation on columns (k, k+1)
            let (c, s, r) = givens(y, z);
            count_rot(self.fc);
            if k > lo {
                self.e[k - 1] = r;
            }
            let (dk, ek, dk1) = (self.d[k], self.e[k], self.d[k + 1]);
            self.d[k] = c * dk + s * ek;
            self.e[k] = -s * dk + c * ek;
            let bulge = s * dk1;
            self.d[k + 1] = c * dk1;
            self.fc.mul(6);
            self.fc.add(2);
            rot_cols(&mut self.v, k, k + 1, c, s, self.fc);

            // left rotation on rows (k, k+1)
            let (c, s, r) = givens(self.d[k], bulge);
            count_rot(self.fc);
            self.d[k] = r;
            let (ek, dk1) = (self.e[k], self.d[k + 1]);
            self.e[k] = c * ek + s * dk1;
            self.d[k + 1] = -s * ek + c * dk1;
            self.fc.mul(4);
            self.fc.add(2);
            if k + 1 < hi {
                y = self.e[k];
                z = s * self.e[k + 1];
                self.e[k + 1] *= c;
                self.fc.mul(2);
            }
            rot_cols(&mut self.u, k, k + 1, c, s, self.fc);
        }
    }
}

/// SVD of an upper bidiagonal matrix by implicit-shift QR iteration.
///
/// A superdiagonal entry is deflated once `|e_i| <= tol * (|d_i| + |d_{i+1}|)`.
/// At most `max_sweeps * n` shifted steps are taken before giving up.
pub fn bidiag_svd(
    b: &Matrix,
    tol: f64,
    max_sweeps: usize,
    fc: &mut FlopCounter,
) -> Result<SvdResult> {
    let n = b.rows();
    if b.cols() != n || n == 0 {
        return invalid(format!(
            "bidiag_svd needs a non-empty square matrix, got {}x{}",
            n,
            b.cols()
        ));
    }
    let scale = b.max_abs();
    for i in 0..n {
        for j in 0..n {
            if j != i && j != i + 1 && b[(i, j)].abs() > 1e-12 * scale {
                return invalid(format!("bidiag_svd input has a nonzero at ({i}, {j})"));
            }
        }
    }

    let mut st = Bidiag {
        d: (0..n).map(|i| b[(i, i)]).collect(),
        e: (0..n - 1).map(|i| b[(i, i + 1)]).collect(),
        u: Matrix::identity(n),
        v: Matrix::identity(n),
        fc,
    };
    let small = f64::EPSILON * scale;
    let limit = max_sweeps * n;
    let mut steps = 0;

    loop {
        for i in 0..n {
            if st.d[i].abs() <= small {
                st.d[i] = 0.0;
            }
        }
        for i in 0..n - 1 {
            if st.e[i].abs() <= tol * (st.d[i].abs() + st.d[i + 1].abs()) {
                st.e[i] = 0.0;
            }
        }
        st.fc.add(2 * n as u64);
        st.fc.mul(n as u64);

        let mut hi = n - 1;
        while hi > 0 && st.e[hi - 1] == 0.0 {
            hi -= 1;
        }
        if hi == 0 {
            break;
        }
        let mut lo = hi - 1;
        while lo > 0 && st.e[lo - 1] != 0.0 {
            lo -= 1;
        }

        if steps >= limit {
            let residual = st.e.iter().map(|x| x * x).sum::<f64>().sqrt();
            return Err(Error::Convergence {
                solver: "bidiag_svd",
                sweeps: max_sweeps,
                residual,
            });
        }

        if let Some(k) = (lo..hi).find(|&k| st.d[k] == 0.0) {
            st.chase_row(k, hi);
        } else if st.d[hi] == 0.0 {
            st.chase_col(lo, hi);
        } else {
            st.golub_kahan_step(lo, hi);
            steps += 1;
        }
    }

    let Bidiag {
        mut d, u, mut v, ..
    } = st;
    for (i, di) in d.iter_mut().enumerate() {
        if *di < 0.0 {
            *di = -*di;
            v.scale_col(i, -1.0);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    Ok(SvdResult {
        u: u.select_cols(&order),
        sigma: order.iter().map(|&i| d[i]).collect(),
        v: v.select_cols(&order),
    })
}
