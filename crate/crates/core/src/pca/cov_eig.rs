use super::{
    center_local, check_target, column_mean, top_components, Diagnostics, MethodTag, PcaResult,
};
use crate::error::Result;
use crate::linalg::{ops, sym_eig, Matrix, DEFAULT_MAX_SWEEPS, DEFAULT_TOL};
use crate::sim::Exec;

pub(super) fn run(a: &Matrix, d: usize, exec: &mut Exec) -> Result<PcaResult> {
    let (n, dim) = a.shape();
    check_target(d, n.min(dim), "covariance eigendecomposition")?;
    let mean = column_mean(a, exec)?;

    // chained partial Gram: each worker adds its rows and passes the D×D block on
    exec.begin("gram");
    let centered = center_local(a, &mean, exec);
    let mut cov = Matrix::zeros(dim, dim);
    for w in 0..exec.workers() {
        let rows = exec.part(w);
        ops::at_b_accumulate(&centered, &centered, rows, &mut cov, exec.worker(w));
        exec.emit("partial_gram", (dim * dim) as u64);
    }

    exec.begin("eigensolve");
    let eig = sym_eig(&cov, DEFAULT_TOL, DEFAULT_MAX_SWEEPS, exec.driver())?;
    let (components, values) = top_components(&eig.vectors, &eig.values, d);
    exec.emit("components", (dim * d) as u64);

    Ok(PcaResult {
        components,
        values,
        mean,
        iterations_used: 1,
        method: MethodTag::CovEig,
        diagnostics: Diagnostics {
            converged: true,
            ..Diagnostics::default()
        },
    })
}
