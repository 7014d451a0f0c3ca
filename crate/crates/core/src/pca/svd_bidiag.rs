use super::{
    center_local, check_target, column_mean, top_components, Diagnostics, MethodTag, PcaResult,
};
use crate::error::{invalid, Result};
use crate::linalg::{
    bidiag_svd, bidiagonalize, qr_decompose_partitioned, Matrix, DEFAULT_MAX_SWEEPS, DEFAULT_TOL,
};
use crate::sim::Exec;

pub(super) fn run(a: &Matrix, d: usize, exec: &mut Exec) -> Result<PcaResult> {
    let (n, dim) = a.shape();
    if n < dim {
        return invalid(format!(
            "QR-first SVD needs at least as many rows as columns, got {n}x{dim}"
        ));
    }
    check_target(d, dim, "bidiagonal SVD")?;
    let mean = column_mean(a, exec)?;

    exec.begin("qr");
    let centered = center_local(a, &mean, exec);
    let (parts, counters) = exec.split();
    let parts = parts.to_vec();
    let (_q, r) = qr_decompose_partitioned(&centered, &parts, counters)?;
    for _ in 0..exec.workers() {
        exec.emit("local_r", (dim * dim) as u64);
    }
    exec.emit("q", (n * d) as u64);

    exec.begin("bidiagonalize");
    let (_u1, b, v1) = bidiagonalize(&r, exec.driver())?;
    emit_trio(exec, dim, d);

    exec.begin("bidiag_svd");
    let svd = bidiag_svd(&b, DEFAULT_TOL, DEFAULT_MAX_SWEEPS, exec.driver())?;
    emit_trio(exec, dim, d);

    // right singular vectors of R are the columns of V1' * V2
    exec.begin("assemble");
    let v2 = svd.v.leading_cols(d);
    let v = crate::linalg::ops::at_b(&v1, &v2, exec.driver())?;
    let sq: Vec<f64> = svd.sigma.iter().map(|s| s * s).collect();
    exec.driver().mul(d as u64);
    let (components, values) = top_components(&v, &sq, d);
    exec.emit("components", (dim * d) as u64);

    Ok(PcaResult {
        components,
        values,
        mean,
        iterations_used: 1,
        method: MethodTag::SvdBidiag,
        diagnostics: Diagnostics {
            converged: true,
            ..Diagnostics::default()
        },
    })
}

/// U (d×d), B (d×D) and V (D×D) as sized in the worst-case analysis.
fn emit_trio(exec: &mut Exec, dim: usize, d: usize) {
    exec.emit("u", (d * d) as u64);
    exec.emit("b", (dim * d) as u64);
    exec.emit("v", (dim * dim) as u64);
}
