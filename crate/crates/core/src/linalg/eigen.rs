use super::{FlopCounter, Matrix};
use crate::error::{invalid, Error, Result};

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `tol * ||S||_F`.
pub fn sym_eig(
    s: &Matrix,
    tol: f64,
    max_sweeps: usize,
    fc: &mut FlopCounter,
) -> Result<EigenPairs> {
    let n = s.rows();
    if s.cols() != n {
        return invalid(format!(
            "sym_eig needs a square matrix, got {}x{}",
            n,
            s.cols()
        ));
    }
    if n == 0 {
        return invalid("sym_eig of an empty matrix");
    }
    let norm = s.frobenius_norm();
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            asym = asym.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if asym > 1e-9 * norm {
        return invalid(format!(
            "sym_eig input is not symmetric (max |S_ij - S_ji| = {asym:e})"
        ));
    }

    let mut a = s.clone();
    // symmetrize so the rotation updates below can assume a_ij == a_ji
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);
    let threshold = tol * norm;

    let mut converged = false;
    for _sweep in 0..=max_sweeps {
        let off = off_diagonal_norm(&a);
        fc.fma((n * n) as u64);
        fc.div_sqrt(1);
        if off <= threshold {
            converged = true;
            break;
        }
        if _sweep == max_sweeps {
            return Err(Error::Convergence {
                solver: "sym_eig",
                sweeps: max_sweeps,
                residual: off,
            });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                fc.mul(5);
                fc.add(4);
                fc.div_sqrt(5);

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_kp = c * akp - sn * akq;
                    let new_kq = sn * akp + c * akq;
                    a[(k, p)] = new_kp;
                    a[(p, k)] = new_kp;
                    a[(k, q)] = new_kq;
                    a[(q, k)] = new_kq;
                }
                fc.mul(4 * (n as u64 - 2));
                fc.add(2 * (n as u64 - 2));
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                fc.fma(2);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
                fc.mul(4 * n as u64);
                fc.add(2 * n as u64);
            }
        }
    }
    debug_assert!(converged);

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    Ok(EigenPairs {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors: v.select_cols(&order),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eig(s: &Matrix) -> EigenPairs {
        sym_eig(s, 1e-12, 100, &mut FlopCounter::new()).unwrap()
    }

    #[test]
    fn diagonal_input() {
        let r = eig(&Matrix::from_diag(&[2.0, 1.0]));
        assert_eq!(r.values, vec![2.0, 1.0]);
        assert_eq!(r.vectors, Matrix::identity(2));
    }

    #[test]
    fn unsorted_diagonal_is_sorted() {
        let r = eig(&Matrix::from_diag(&[1.0, 3.0, 2.0]));
        assert_eq!(r.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(r.vectors.col(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        let s = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let r = eig(&s);
        assert!((r.values[0] - 3.0).abs() < 1e-14);
        assert!((r.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = r.vectors.col(0);
        let v1 = r.vectors.col(1);
        assert!((v0[0].abs() - h).abs() < 1e-14 && (v0[0] - v0[1]).abs() < 1e-14);
        assert!((v1[0].abs() - h).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
    }

    #[test]
    fn scalar() {
        let r = eig(&Matrix::from_diag(&[5.0]));
        assert_eq!(r.values, vec![5.0]);
        assert_eq!(r.vectors, Matrix::identity(1));
    }

    #[test]
    fn zero_matrix() {
        let r = eig(&Matrix::zeros(3, 3));
        assert_eq!(r.values, vec![0.0; 3]);
    }

    #[test]
    fn rejects_asymmetric_and_nonsquare() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            sym_eig(&s, 1e-12, 100, &mut FlopCounter::new()),
            Err(Error::InvalidInput(_))
        ));
        assert!(sym_eig(&Matrix::zeros(2, 3), 1e-12, 100, &mut FlopCounter::new()).is_err());
    }

    #[test]
    fn sweep_limit_reports_residual() {
        let s = Matrix::from_rows(&[
            vec![1.0, 0.3, 0.2],
            vec![0.3, 2.0, 0.1],
            vec![0.2, 0.1, 3.0],
        ])
        .unwrap();
        match sym_eig(&s, 1e-12, 0, &mut FlopCounter::new()) {
            Err(Error::Convergence { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
