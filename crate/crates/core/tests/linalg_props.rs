mod common;

use common::{max_abs_diff, off_bidiagonal, orthonormality_error, scale_cols, thin_svd, uniform};
use pca_costlab::linalg::{bidiag_svd, bidiagonalize, qr_decompose, sym_eig, FlopCounter};
use pca_costlab::Matrix;
use proptest::prelude::*;

fn tall() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=50, 1usize..=50, any::<u64>()).prop_map(|(a, b, s)| (a.max(b), a.min(b), s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qr_reconstructs((rows, cols, seed) in tall()) {
        let a = uniform(rows, cols, seed);
        let (q, r) = qr_decompose(&a, &mut FlopCounter::new()).unwrap();
        prop_assert!(max_abs_diff(&q.mul(&r), &a) < 1e-10);
        prop_assert!(orthonormality_error(&q) < 1e-10);
        for i in 0..cols {
            prop_assert!(r[(i, i)] >= 0.0);
            for j in 0..i {
                prop_assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn bidiagonal_form(n in 1usize..=30, seed in any::<u64>()) {
        let r = uniform(n, n, seed);
        let (u1, b, v1) = bidiagonalize(&r, &mut FlopCounter::new()).unwrap();
        prop_assert!(off_bidiagonal(&b) <= 1e-12 * r.frobenius_norm());
        prop_assert!(max_abs_diff(&u1.mul(&b).mul(&v1), &r) < 1e-10);
        prop_assert!(orthonormality_error(&u1) < 1e-12);
        prop_assert!(orthonormality_error(&v1.transpose()) < 1e-12);
    }

    #[test]
    fn svd_reconstructs((rows, cols, seed) in tall()) {
        let a = uniform(rows, cols, seed);
        let (u, s, v) = thin_svd(&a);
        prop_assert!(max_abs_diff(&scale_cols(&u, &s).mul(&v.transpose()), &a) < 1e-8);
        prop_assert!(orthonormality_error(&u) < 1e-8);
        prop_assert!(orthonormality_error(&v) < 1e-8);
        prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn sym_eig_reconstructs(n in 1usize..=30, seed in any::<u64>()) {
        let g = uniform(n, n, seed);
        let s = g.add_transpose();
        let e = sym_eig(&s, 1e-12, 100, &mut FlopCounter::new()).unwrap();
        let back = scale_cols(&e.vectors, &e.values).mul(&e.vectors.transpose());
        prop_assert!(max_abs_diff(&back, &s) < 1e-8);
        prop_assert!(orthonormality_error(&e.vectors) < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn bidiag_svd_matches_gram_eigenvalues(n in 1usize..=25, seed in any::<u64>()) {
        let (_, b, _) = bidiagonalize(&uniform(n, n, seed), &mut FlopCounter::new()).unwrap();
        let svd = bidiag_svd(&b, 1e-12, 100, &mut FlopCounter::new()).unwrap();
        let gram = b.transpose().mul(&b);
        let eig = sym_eig(&gram, 1e-14, 100, &mut FlopCounter::new()).unwrap();
        let top = svd.sigma[0];
        for (s, l) in svd.sigma.iter().zip(&eig.values) {
            // squared singular values vs eigenvalues, relative to the largest
            prop_assert!((s * s - l.max(0.0)).abs() <= 1e-8 * top * top);
        }
    }
}

#[test]
fn flop_counts_are_exact() {
    let a = uniform(6, 4, 1);
    let b = uniform(4, 3, 2);
    let mut fc = FlopCounter::new();
    pca_costlab::linalg::matmul(&a, &b, &mut fc).unwrap();
    assert_eq!((fc.muls, fc.adds), (72, 72));
}

trait AddTranspose {
    fn add_transpose(&self) -> Matrix;
}

impl AddTranspose for Matrix {
    fn add_transpose(&self) -> Matrix {
        let t = self.transpose();
        let data = self
            .data()
            .iter()
            .zip(t.data())
            .map(|(x, y)| x + y)
            .collect();
        Matrix::from_vec(self.rows(), self.cols(), data).unwrap()
    }
}
