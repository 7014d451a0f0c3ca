use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::pca::gaussian_matrix;

/// `G1 * G2' + noise_sigma * E` with `G1` (N×rank), `G2` (D×rank) and `E`
/// (N×D) standard normal, drawn in that order from a ChaCha8 stream.
pub fn gen_synthetic(
    n: usize,
    dim: usize,
    rank: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Matrix> {
    if rank == 0 || rank > n.min(dim) {
        return invalid(format!("rank {rank} outside 1..={}", n.min(dim)));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return invalid(format!(
            "noise_sigma must be finite and >= 0, got {noise_sigma}"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g1 = gaussian_matrix(n, rank, &mut rng);
    let g2 = gaussian_matrix(dim, rank, &mut rng);
    let mut a = g1.mul(&g2.transpose());
    if noise_sigma > 0.0 {
        let e = gaussian_matrix(n, dim, &mut rng);
        let data = a
            .data()
            .iter()
            .zip(e.data())
            .map(|(x, y)| x + noise_sigma * y)
            .collect();
        a = Matrix::from_vec(n, dim, data)?;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pca::{pca_cov_eig, pca_svd_bidiag};

    #[test]
    fn rank_one_outer_product() {
        let a = gen_synthetic(12, 5, 1, 0.0, 1).unwrap();
        let r = pca_svd_bidiag(&a, 2).unwrap();
        assert!(r.values[1].sqrt() < 1e-12 * r.values[0].sqrt());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_synthetic(7, 4, 2, 0.3, 42).unwrap();
        let b = gen_synthetic(7, 4, 2, 0.3, 42).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data(), gen_synthetic(7, 4, 2, 0.3, 43).unwrap().data());
    }

    #[test]
    fn rank_three_has_three_values() {
        let a = gen_synthetic(30, 8, 3, 0.0, 9).unwrap();
        let r = pca_cov_eig(&a, 8).unwrap();
        let big = r
            .values
            .iter()
            .filter(|&&v| v > 1e-10 * r.values[0])
            .count();
        assert_eq!(big, 3);
    }

    #[test]
    fn rejects_bad_rank() {
        assert!(gen_synthetic(5, 3, 0, 0.0, 1).is_err());
        assert!(gen_synthetic(5, 3, 4, 0.0, 1).is_err());
        assert!(gen_synthetic(5, 3, 1, -1.0, 1).is_err());
    }
}
