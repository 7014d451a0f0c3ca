//! Probabilistic PCA fitted by expectation maximization.
//!
//! Model `y = C x + mu + eps` with `x ~ N(0, I_d)` and `eps ~ N(0, s2 I_D)`.
//! Per iteration, with `M = C'C + s2 I`:
//!
//! ```text
//! E-step   <x_n>      = M^-1 C' (y_n - mu)
//!          sum <x x'> = N s2 M^-1 + X'X
//! M-step   C   <- [sum (y_n - mu) <x_n>'] [sum <x x'>]^-1
//!          s2  <- (||Y||^2 - 2 tr(C' Y'X) + tr(sum<x x'> C'C)) / (N D)
//! ```
//!
//! Progress is tracked by the entrywise 1-norm of `Y - X C'` where `X` is the
//! least-squares latent matrix `Y C (C'C)^-1` of the current iterate.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ssvd::gaussian_matrix;
use super::{
    canonical_signs, center_local, column_mean, Diagnostics, MethodTag, PcaResult, PpcaMode,
    PpcaParams,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    ops, qr_decompose, sym_eig, FlopCounter, Matrix, DEFAULT_MAX_SWEEPS, DEFAULT_TOL,
};
use crate::sim::Exec;

/// Noise variance below which the model is considered collapsed.
const MIN_NOISE_VARIANCE: f64 = 1e-300;

fn l1_residual_accumulate(
    y: &Matrix,
    x: &Matrix,
    c: &Matrix,
    rows: Range<usize>,
    acc: &mut f64,
    fc: &mut FlopCounter,
) {
    let n = rows.len() as u64;
    for r in rows {
        let xr = x.row(r);
        for (j, &yj) in y.row(r).iter().enumerate() {
            let fit: f64 = xr.iter().zip(c.row(j)).map(|(a, b)| a * b).sum();
            *acc += (yj - fit).abs();
        }
    }
    let (dim, d) = (c.rows() as u64, c.cols() as u64);
    fc.fma(n * dim * d);
    fc.add(2 * n * dim);
}

/// Entrywise 1-norm of `y_c - x * c'`.
pub fn reconstruction_error_1norm(y_c: &Matrix, x: &Matrix, c: &Matrix) -> Result<f64> {
    if x.rows() != y_c.rows() || c.rows() != y_c.cols() || x.cols() != c.cols() {
        return invalid(format!(
            "reconstruction shapes disagree: Y {}x{}, X {}x{}, C {}x{}",
            y_c.rows(),
            y_c.cols(),
            x.rows(),
            x.cols(),
            c.rows(),
            c.cols()
        ));
    }
    let mut acc = 0.0;
    l1_residual_accumulate(y_c, x, c, 0..y_c.rows(), &mut acc, &mut FlopCounter::new());
    Ok(acc)
}

fn validate(n: usize, dim: usize, p: &PpcaParams) -> Result<()> {
    if p.d == 0 || p.d >= dim {
        return invalid(format!("ppca needs 1 <= d < D, got d={} D={dim}", p.d));
    }
    if n <= p.d {
        return invalid(format!("ppca needs N > d, got N={n} d={}", p.d));
    }
    if p.max_iter == 0 {
        return invalid("ppca needs max_iter >= 1");
    }
    if !p.tol.is_finite() || p.tol <= 0.0 {
        return invalid(format!("ppca tolerance must be positive, got {}", p.tol));
    }
    Ok(())
}

fn add_identity(m: &Matrix, s: f64, fc: &mut FlopCounter) -> Matrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        out[(i, i)] += s;
    }
    fc.add(m.rows() as u64);
    out
}

pub(super) fn run(a: &Matrix, params: &PpcaParams, exec: &mut Exec) -> Result<PcaResult> {
    let (n, dim) = a.shape();
    validate(n, dim, params)?;
    let d = params.d;
    let mean = column_mean(a, exec)?;

    exec.begin("center");
    let y = center_local(a, &mean, exec);
    let (mut y_sq, mut y_l1) = (0.0, 0.0);
    for w in 0..exec.workers() {
        let rows = exec.part(w);
        for r in rows.clone() {
            for &v in y.row(r) {
                y_sq += v * v;
                y_l1 += v.abs();
            }
        }
        let cnt = (rows.len() * dim) as u64;
        let fc = exec.worker(w);
        fc.fma(cnt);
        fc.add(cnt);
        exec.emit("norms", 2);
    }
    let floor = f64::EPSILON.sqrt() * y_l1;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut c = gaussian_matrix(dim, d, &mut rng);
    let mut s2 = 1.0;
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    let mut x = Matrix::zeros(n, d);
    let mut x_ls = Matrix::zeros(n, d);
    for t in 1..=params.max_iter {
        iterations = t;

        exec.begin(format!("em_{t}_estep"));
        exec.broadcast("c_and_noise", (dim * d + 1) as u64);
        let ctc = ops::at_b(&c, &c, exec.driver())?;
        let m_inv = ops::spd_inverse(&add_identity(&ctc, s2, exec.driver()), exec.driver())?;
        let ctc_inv = ops::spd_inverse(&ctc, exec.driver())?;
        let c_minv = ops::matmul(&c, &m_inv, exec.driver())?;
        let c_proj = ops::matmul(&c, &ctc_inv, exec.driver())?;

        let mut xtx = Matrix::zeros(d, d);
        let mut err = 0.0;
        for w in 0..exec.workers() {
            let rows = exec.part(w);
            let fc = exec.worker(w);
            ops::matmul_rows(&y, &c_minv, rows.clone(), &mut x, fc);
            ops::matmul_rows(&y, &c_proj, rows.clone(), &mut x_ls, fc);
            l1_residual_accumulate(&y, &x_ls, &c, rows.clone(), &mut err, fc);
            ops::at_b_accumulate(&x, &x, rows.clone(), &mut xtx, fc);
            if params.mode == PpcaMode::Standard {
                exec.emit("x", (rows.len() * d) as u64);
            }
            exec.emit("partial_xtx", (d * d) as u64);
            exec.emit("partial_error", 1);
        }
        history.push(err);

        exec.begin(format!("em_{t}_mstep"));
        let mut syx = Matrix::zeros(dim, d);
        let mut x_again = Matrix::zeros(n, d);
        for w in 0..exec.workers() {
            let rows = exec.part(w);
            let fc = exec.worker(w);
            let latent = match params.mode {
                PpcaMode::Standard => &x,
                PpcaMode::Recompute => {
                    ops::matmul_rows(&y, &c_minv, rows.clone(), &mut x_again, fc);
                    &x_again
                }
            };
            ops::at_b_accumulate(&y, latent, rows, &mut syx, fc);
            exec.emit("partial_syx", (dim * d) as u64);
        }

        let fc = exec.driver();
        let mut sxx = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                sxx[(i, j)] = xtx[(i, j)] + n as f64 * s2 * m_inv[(i, j)];
            }
        }
        fc.mul(2 * (d * d) as u64);
        fc.add((d * d) as u64);
        let c_new = ops::matmul(&syx, &ops::spd_inverse(&sxx, fc)?, fc)?;
        let cross: f64 = c_new
            .data()
            .iter()
            .zip(syx.data())
            .map(|(a, b)| a * b)
            .sum();
        let cnc = ops::at_b(&c_new, &c_new, fc)?;
        let trace: f64 = sxx.data().iter().zip(cnc.data()).map(|(a, b)| a * b).sum();
        fc.fma(2 * (dim * d + d * d) as u64);
        let s2_new = (y_sq - 2.0 * cross + trace) / (n * dim) as f64;
        fc.mul(2);
        fc.add(2);
        fc.div_sqrt(1);
        if !s2_new.is_finite() || s2_new < MIN_NOISE_VARIANCE {
            return Err(Error::Degenerate(format!(
                "noise variance collapsed to {s2_new:e} at iteration {t}"
            )));
        }
        c = c_new;
        s2 = s2_new;

        if let [.., prev, cur] = history[..] {
            fc.add(1);
            fc.div_sqrt(1);
            if (prev - cur).abs() <= params.tol * prev.max(floor) {
                converged = true;
                break;
            }
        }
    }

    // orthonormal basis of span(C), rotated to diagonalize the projected covariance
    exec.begin("finalize");
    let (q, _) = qr_decompose(&c, exec.driver())?;
    let mut yq = Matrix::zeros(n, d);
    let mut proj_cov = Matrix::zeros(d, d);
    for w in 0..exec.workers() {
        let rows = exec.part(w);
        let fc = exec.worker(w);
        ops::matmul_rows(&y, &q, rows.clone(), &mut yq, fc);
        ops::at_b_accumulate(&yq, &yq, rows, &mut proj_cov, fc);
        exec.emit("partial_projected_cov", (d * d) as u64);
    }
    let eig = sym_eig(&proj_cov, DEFAULT_TOL, DEFAULT_MAX_SWEEPS, exec.driver())?;
    let mut components = ops::matmul(&q, &eig.vectors, exec.driver())?;
    canonical_signs(&mut components);
    exec.emit("components", (dim * d) as u64);

    Ok(PcaResult {
        components,
        values: eig.values.iter().map(|v| v.max(0.0)).collect(),
        mean,
        iterations_used: iterations,
        method: MethodTag::Ppca,
        diagnostics: Diagnostics {
            converged,
            rank_deficient: false,
            error_history: history,
            noise_variance: Some(s2),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen_synthetic;
    use crate::pca::{largest_principal_angle, pca_cov_eig, ppca_em};

    fn params(d: usize, mode: PpcaMode) -> PpcaParams {
        PpcaParams {
            d,
            max_iter: 200,
            tol: 1e-6,
            mode,
            seed: 1,
        }
    }

    #[test]
    fn error_of_exact_fit_is_zero() {
        let c = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let x = Matrix::from_rows(&[vec![1.0, -1.0], vec![0.5, 2.0]]).unwrap();
        let y = x.mul(&c.transpose());
        assert_eq!(reconstruction_error_1norm(&y, &x, &c).unwrap(), 0.0);
    }

    #[test]
    fn error_with_zero_loadings_is_data_norm() {
        let y = Matrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![-3.0, 0.0, 4.0]]).unwrap();
        let e = reconstruction_error_1norm(&y, &Matrix::zeros(2, 1), &Matrix::zeros(3, 1)).unwrap();
        assert_eq!(e, 10.5);
    }

    #[test]
    fn error_matches_explicit_sum() {
        let y = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 7.0]]).unwrap();
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let c = Matrix::from_rows(&[vec![1.5], vec![2.0]]).unwrap();
        // residuals: (-0.5, 0), (0, 0), (0.5, 1)
        assert_eq!(reconstruction_error_1norm(&y, &x, &c).unwrap(), 2.0);
        assert!(reconstruction_error_1norm(&y, &c, &x).is_err());
    }

    #[test]
    fn noiseless_rank_two_subspace() {
        let a = gen_synthetic(60, 8, 2, 0.0, 4).unwrap();
        let r = ppca_em(&a, params(2, PpcaMode::Standard)).unwrap();
        let oracle = pca_cov_eig(&a, 2).unwrap();
        let ang = largest_principal_angle(&r.components, &oracle.components).unwrap();
        assert!(ang < 1e-3, "{ang}");
        assert!(r.diagnostics.converged);
        for (v, w) in r.values.iter().zip(&oracle.values) {
            assert!((v - w).abs() < 1e-6 * w, "{v} vs {w}");
        }
    }

    #[test]
    fn noisy_data_estimates_noise_variance() {
        let a = gen_synthetic(400, 10, 2, 0.5, 9).unwrap();
        let r = ppca_em(&a, params(2, PpcaMode::Standard)).unwrap();
        let s2 = r.diagnostics.noise_variance.unwrap();
        assert!((s2 - 0.25).abs() < 0.05, "{s2}");
        let oracle = pca_cov_eig(&a, 2).unwrap();
        let ang = largest_principal_angle(&r.components, &oracle.components).unwrap();
        assert!(ang < 1e-3, "{ang}");
    }

    #[test]
    fn axis_aligned_subspace() {
        // variance only along the first two coordinates, small isotropic jitter elsewhere
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = gaussian_matrix(80, 5, &mut rng);
        let data = g
            .data()
            .chunks(5)
            .flat_map(|r| {
                [
                    10.0 * r[0],
                    5.0 * r[1],
                    0.01 * r[2],
                    0.01 * r[3],
                    0.01 * r[4],
                ]
            })
            .collect();
        let a = Matrix::from_vec(80, 5, data).unwrap();
        let r = ppca_em(&a, params(2, PpcaMode::Standard)).unwrap();
        let axes = Matrix::identity(5).leading_cols(2);
        let ang = largest_principal_angle(&r.components, &axes).unwrap();
        assert!(ang < 0.01, "{ang}");
    }

    #[test]
    fn modes_agree_bitwise() {
        let a = gen_synthetic(50, 7, 3, 0.2, 5).unwrap();
        let s = ppca_em(&a, params(2, PpcaMode::Standard)).unwrap();
        let r = ppca_em(&a, params(2, PpcaMode::Recompute)).unwrap();
        assert!(s.bit_identical(&r));
    }

    #[test]
    fn constant_data_is_degenerate() {
        let a = Matrix::from_vec(10, 4, vec![3.0; 40]).unwrap();
        assert!(matches!(
            ppca_em(&a, params(1, PpcaMode::Standard)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn rejects_bad_params() {
        let a = gen_synthetic(10, 4, 2, 0.0, 1).unwrap();
        assert!(ppca_em(&a, params(4, PpcaMode::Standard)).is_err());
        let mut p = params(1, PpcaMode::Standard);
        p.tol = 0.0;
        assert!(ppca_em(&a, p).is_err());
        p.tol = 1e-6;
        p.max_iter = 0;
        assert!(ppca_em(&a, p).is_err());
    }
}
