//! Phase-based distributed execution ledger.
//!
//! `P` logical workers hold balanced row blocks of the input. A method runs as
//! an ordered list of synchronous phases; at each boundary the ledger books
//! every matrix that is shipped (once per producing worker, broadcasts once)
//! and the flops each worker and the driver spent inside the phase.

mod exec;
mod report;

use std::ops::Range;

pub use exec::{Emission, Exec, Phase};
pub use report::{CostReport, ParamsEcho, Totals};

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::pca::{Method, PcaResult};

/// Half-open row range owned by one worker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerPartition {
    pub worker_id: usize,
    pub row_range: Range<usize>,
}

/// Balanced disjoint cover of `0..n` by `p` ranges; the first `n % p`
/// workers get one extra row.
pub fn partition_rows(n: usize, p: usize) -> Result<Vec<WorkerPartition>> {
    if p == 0 || p > n {
        return invalid(format!("worker count {p} must be in 1..={n}"));
    }
    let (base, extra) = (n / p, n % p);
    let mut start = 0;
    Ok((0..p)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let part = WorkerPartition {
                worker_id: w,
                row_range: start..start + len,
            };
            start += len;
            part
        })
        .collect())
}

/// Runs `method` on `a` over `workers` logical workers.
///
/// The returned result is bit-identical to [`Method::run_direct`]; only the
/// accounting differs.
pub fn run_phased(method: &Method, a: &Matrix, workers: usize) -> Result<(PcaResult, CostReport)> {
    let parts = partition_rows(a.rows(), workers)?;
    let mut exec = Exec::new(parts.into_iter().map(|p| p.row_range).collect());
    let result = method.run(a, &mut exec)?;
    let echo = ParamsEcho::new(method, a.rows(), a.cols(), workers, result.iterations_used);
    Ok((result, CostReport::new(exec.into_phases(), echo)))
}

/// Least-squares slope of `log(measure)` against `log(scale)`.
pub fn fit_scaling_exponent(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 3 {
        return invalid(format!("need at least 3 points, got {}", series.len()));
    }
    if let Some(&(s, m)) = series
        .iter()
        .find(|(s, m)| !(*s > 0.0 && *m > 0.0 && s.is_finite() && m.is_finite()))
    {
        return invalid(format!("scaling points must be positive, got ({s}, {m})"));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(s, m)| (s.ln(), m.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return invalid("all scales are equal");
    }
    Ok(sxy / sxx)
}
