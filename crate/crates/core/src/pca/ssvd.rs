use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{center_local, column_mean, Diagnostics, MethodTag, PcaResult, SsvdParams};
use crate::error::{invalid, Result};
use crate::linalg::{
    ops, qr_decompose_partitioned, sym_eig, Matrix, DEFAULT_MAX_SWEEPS, DEFAULT_TOL,
};
use crate::sim::Exec;

/// Singular values below this fraction of the largest are treated as zero.
const RANK_EPS: f64 = 1e-12;

/// Row-major matrix of i.i.d. standard normals.
pub(crate) fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    use rand_distr::{Distribution, StandardNormal};
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("finite normals")
}

fn orthonormalize(z: &Matrix, exec: &mut Exec) -> Result<Matrix> {
    let (parts, counters) = exec.split();
    let parts = parts.to_vec();
    Ok(qr_decompose_partitioned(z, &parts, counters)?.0)
}

pub(super) fn run(a: &Matrix, params: &SsvdParams, exec: &mut Exec) -> Result<PcaResult> {
    let (n, dim) = a.shape();
    let d = params.d;
    let l = params.sample_width();
    if d == 0 {
        return invalid("ssvd needs d >= 1");
    }
    if l > n.min(dim) {
        return invalid(format!(
            "ssvd sample width d+p={l} exceeds min(N, D)={}",
            n.min(dim)
        ));
    }
    let mean = column_mean(a, exec)?;

    exec.begin("sample");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let omega = gaussian_matrix(dim, l, &mut rng);
    exec.broadcast("omega", (dim * l) as u64);
    let centered = center_local(a, &mean, exec);
    let mut z = Matrix::zeros(n, l);
    for w in 0..exec.workers() {
        let rows = exec.part(w);
        ops::matmul_rows(&centered, &omega, rows.clone(), &mut z, exec.worker(w));
        exec.emit("z", (rows.len() * l) as u64);
    }

    // Z <- A_c (A_c' orth(Z)), orthonormalizing before each round
    for t in 1..=params.j {
        exec.begin(format!("power_iteration_{t}"));
        let q = orthonormalize(&z, exec)?;
        let mut y = Matrix::zeros(dim, l);
        for w in 0..exec.workers() {
            let rows = exec.part(w);
            ops::at_b_accumulate(&centered, &q, rows, &mut y, exec.worker(w));
        }
        exec.emit("at_q", (dim * l) as u64);
        for w in 0..exec.workers() {
            let rows = exec.part(w);
            ops::matmul_rows(&centered, &y, rows, &mut z, exec.worker(w));
        }
        exec.emit("z", (n * l) as u64);
    }

    exec.begin("qr");
    let q = orthonormalize(&z, exec)?;
    for _ in 0..exec.workers() {
        exec.emit("local_r", (l * l) as u64);
    }
    exec.emit("q", (n * l) as u64);

    exec.begin("project");
    let mut b = Matrix::zeros(l, dim);
    for w in 0..exec.workers() {
        let rows = exec.part(w);
        ops::at_b_accumulate(&q, &centered, rows, &mut b, exec.worker(w));
        exec.emit("partial_b", (l * dim) as u64);
    }

    // small l×l problem on B B'; V = B' U~ S^{-1}
    exec.begin("small_eig");
    let bbt = ops::a_bt(&b, &b, exec.driver());
    let eig = sym_eig(&bbt, DEFAULT_TOL, DEFAULT_MAX_SWEEPS, exec.driver())?;
    let lead = eig.values[0].max(0.0).sqrt();
    let mut components = Matrix::zeros(dim, d);
    let mut values = Vec::with_capacity(d);
    let mut rank_deficient = false;
    for k in 0..d {
        let lambda = eig.values[k].max(0.0);
        let sigma = lambda.sqrt();
        exec.driver().div_sqrt(1);
        if lead == 0.0 || sigma < RANK_EPS * lead {
            rank_deficient = true;
            values.push(if lead == 0.0 { 0.0 } else { lambda });
            continue;
        }
        let u = eig.vectors.col(k);
        for c in 0..dim {
            let mut acc = 0.0;
            for (r, &ur) in u.iter().enumerate() {
                acc += b[(r, c)] * ur;
            }
            components[(c, k)] = acc / sigma;
        }
        exec.driver().fma((dim * l) as u64);
        exec.driver().div_sqrt(dim as u64);
        values.push(lambda);
    }
    super::canonical_signs(&mut components);
    exec.emit("components", (dim * d) as u64);

    Ok(PcaResult {
        components,
        values,
        mean,
        iterations_used: params.j,
        method: MethodTag::Ssvd,
        diagnostics: Diagnostics {
            converged: true,
            rank_deficient,
            ..Diagnostics::default()
        },
    })
}
