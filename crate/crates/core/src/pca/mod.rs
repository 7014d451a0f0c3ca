//! The four PCA methods.
//!
//! Each method is written once against an [`Exec`] context. The public
//! functions here run it in memory on a single row block; the simulator runs
//! the very same code over several blocks to obtain the cost ledger.

mod cov_eig;
mod ppca;
mod ssvd;
mod svd_bidiag;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{ops, sym_eig, FlopCounter, Matrix};
use crate::sim::Exec;

pub use ppca::reconstruction_error_1norm;
pub(crate) use ssvd::gaussian_matrix;

/// Which algorithm produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodTag {
    CovEig,
    SvdBidiag,
    Ssvd,
    Ppca,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::CovEig => "coveig",
            MethodTag::SvdBidiag => "svd",
            MethodTag::Ssvd => "ssvd",
            MethodTag::Ppca => "ppca",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// False when an iterative method stopped at its iteration cap.
    pub converged: bool,
    /// Some requested component had (numerically) zero variance and was
    /// returned as a zero column.
    pub rank_deficient: bool,
    /// PPCA: 1-norm reconstruction error of each iterate, in order.
    pub error_history: Vec<f64>,
    /// PPCA: final noise variance.
    pub noise_variance: Option<f64>,
}

/// Principal components with their variances.
#[derive(Clone, Debug)]
pub struct PcaResult {
    /// D×d, one component per column.
    pub components: Matrix,
    /// Eigenvalues of the unnormalized covariance `A_c' A_c`, descending.
    pub values: Vec<f64>,
    pub mean: Vec<f64>,
    pub iterations_used: usize,
    pub method: MethodTag,
    pub diagnostics: Diagnostics,
}

impl PcaResult {
    /// Exact equality down to the bit pattern of every float.
    pub fn bit_identical(&self, other: &PcaResult) -> bool {
        fn same(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        }
        self.components.shape() == other.components.shape()
            && same(self.components.data(), other.components.data())
            && same(&self.values, &other.values)
            && same(&self.mean, &other.mean)
            && same(
                &self.diagnostics.error_history,
                &other.diagnostics.error_history,
            )
            && self.diagnostics.noise_variance.map(f64::to_bits)
                == other.diagnostics.noise_variance.map(f64::to_bits)
            && self.iterations_used == other.iterations_used
            && self.method == other.method
            && self.diagnostics.converged == other.diagnostics.converged
            && self.diagnostics.rank_deficient == other.diagnostics.rank_deficient
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SsvdParams {
    /// Target dimensionality.
    pub d: usize,
    /// Oversampling.
    pub p: usize,
    /// Power iterations.
    pub j: usize,
    pub seed: u64,
}

impl SsvdParams {
    pub fn sample_width(&self) -> usize {
        self.d + self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PpcaMode {
    /// Ship the latent matrix between passes.
    Standard,
    /// Recompute the latent matrix in every pass instead of shipping it.
    Recompute,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PpcaParams {
    pub d: usize,
    pub max_iter: usize,
    /// Relative change of the reconstruction error below which EM stops.
    pub tol: f64,
    pub mode: PpcaMode,
    pub seed: u64,
}

/// A method together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Method {
    CovEig { d: usize },
    SvdBidiag { d: usize },
    Ssvd(SsvdParams),
    Ppca(PpcaParams),
}

impl Method {
    pub fn tag(&self) -> MethodTag {
        match self {
            Method::CovEig { .. } => MethodTag::CovEig,
            Method::SvdBidiag { .. } => MethodTag::SvdBidiag,
            Method::Ssvd(_) => MethodTag::Ssvd,
            Method::Ppca(_) => MethodTag::Ppca,
        }
    }

    pub fn target_dim(&self) -> usize {
        match *self {
            Method::CovEig { d } | Method::SvdBidiag { d } => d,
            Method::Ssvd(p) => p.d,
            Method::Ppca(p) => p.d,
        }
    }

    /// Runs the method against an execution context.
    pub fn run(&self, a: &Matrix, exec: &mut Exec) -> Result<PcaResult> {
        match *self {
            Method::CovEig { d } => cov_eig::run(a, d, exec),
            Method::SvdBidiag { d } => svd_bidiag::run(a, d, exec),
            Method::Ssvd(p) => ssvd::run(a, &p, exec),
            Method::Ppca(p) => ppca::run(a, &p, exec),
        }
    }

    /// Runs the method in memory.
    pub fn run_direct(&self, a: &Matrix) -> Result<PcaResult> {
        self.run(a, &mut Exec::single(a.rows()))
    }
}

/// Principal components from the eigendecomposition of the covariance.
pub fn pca_cov_eig(a: &Matrix, d: usize) -> Result<PcaResult> {
    Method::CovEig { d }.run_direct(a)
}

/// Principal components from QR, Givens bidiagonalization and bidiagonal SVD.
pub fn pca_svd_bidiag(a: &Matrix, d: usize) -> Result<PcaResult> {
    Method::SvdBidiag { d }.run_direct(a)
}

/// Principal components by randomized range finding.
pub fn ssvd(a: &Matrix, params: SsvdParams) -> Result<PcaResult> {
    Method::Ssvd(params).run_direct(a)
}

/// Principal subspace by EM on the probabilistic PCA model.
pub fn ppca_em(a: &Matrix, params: PpcaParams) -> Result<PcaResult> {
    Method::Ppca(params).run_direct(a)
}

/// Flips each column so its largest-magnitude entry is positive.
pub fn canonical_signs(m: &mut Matrix) {
    for j in 0..m.cols() {
        let mut best = 0.0f64;
        for i in 0..m.rows() {
            let v = m[(i, j)];
            if v.abs() > best.abs() {
                best = v;
            }
        }
        if best < 0.0 {
            m.scale_col(j, -1.0);
        }
    }
}

/// Largest principal angle (radians) between the column spans of `a` and
/// `b`, both assumed to have orthonormal columns.
///
/// Computed from the sine side, `||(I - a a') b||_2`, which stays accurate for
/// tiny angles where `acos` of the cosine would not.
pub fn largest_principal_angle(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.rows() != b.rows() {
        return invalid("subspaces live in different dimensions");
    }
    let mut fc = FlopCounter::new();
    let proj = ops::at_b(a, b, &mut fc)?;
    let resid = b.sub(&a.mul(&proj));
    let g = ops::gram(&resid, &mut fc);
    let top = sym_eig(&g, 1e-14, 100, &mut fc)?.values[0].max(0.0);
    Ok(top.sqrt().min(1.0).asin())
}

fn check_target(d: usize, max: usize, what: &str) -> Result<()> {
    if d == 0 || d > max {
        return invalid(format!(
            "target dimensionality d={d} outside 1..={max} ({what})"
        ));
    }
    Ok(())
}

/// Phase `column_sums`: every worker ships its `D` column sums; each
/// consumer derives the mean from the gathered partials.
pub(crate) fn column_mean(a: &Matrix, exec: &mut Exec) -> Result<Vec<f64>> {
    if a.is_empty() {
        return invalid("empty input matrix");
    }
    if exec.parts().last().map(|p| p.end) != Some(a.rows()) {
        return invalid("row partition does not match the input");
    }
    exec.begin("column_sums");
    let mut sums = vec![0.0; a.cols()];
    for w in 0..exec.workers() {
        let rows = exec.part(w);
        ops::column_sums_accumulate(a, rows, &mut sums, exec.worker(w));
        exec.emit("column_sums", a.cols() as u64);
    }
    Ok(ops::means_from_sums(&sums, a.rows(), exec.driver()))
}

/// Centers every worker's rows in the current phase.
pub(crate) fn center_local(a: &Matrix, mean: &[f64], exec: &mut Exec) -> Matrix {
    let mut c = Matrix::zeros(a.rows(), a.cols());
    for w in 0..exec.workers() {
        let rows = exec.part(w);
        ops::center_rows(a, mean, rows, &mut c, exec.worker(w));
    }
    c
}

/// Top-`d` eigenpairs as components (sign-normalized) and clamped values.
pub(crate) fn top_components(vectors: &Matrix, values: &[f64], d: usize) -> (Matrix, Vec<f64>) {
    let mut comps = vectors.leading_cols(d);
    canonical_signs(&mut comps);
    (comps, values[..d].iter().map(|v| v.max(0.0)).collect())
}
