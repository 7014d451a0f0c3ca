use std::fmt::Write as _;

use serde::Serialize;

use super::config::{ExperimentConfig, Point, ReportFormat};
use super::io::{load_matrix, MatrixFormat};
use super::synthetic::gen_synthetic;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::pca::{largest_principal_angle, pca_cov_eig, MethodTag, PcaResult};
use crate::sim::{fit_scaling_exponent, run_phased, CostReport};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis_value: Option<usize>,
    pub n: usize,
    pub d_dims: usize,
    pub target_d: usize,
    pub workers: usize,
    pub iterations_used: usize,
    pub total_flops: u64,
    pub total_intermediate_elements: u64,
    pub total_intermediate_bytes: u64,
    /// Largest principal angle against the covariance oracle; absent for
    /// the oracle method itself.
    pub subspace_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub method: &'static str,
    pub axis: Option<&'static str>,
    pub rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flop_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub communication_exponent: Option<f64>,
}

impl SweepReport {
    /// Flop and communication exponents fitted from the rows, when there are
    /// at least three of them.
    pub fn fit_exponents(rows: &[SweepRow]) -> Result<(Option<f64>, Option<f64>)> {
        let axis: Option<Vec<f64>> = rows
            .iter()
            .map(|r| r.axis_value.map(|v| v as f64))
            .collect();
        match axis {
            Some(xs) if xs.len() >= 3 => {
                let flops: Vec<_> = xs
                    .iter()
                    .zip(rows)
                    .map(|(&x, r)| (x, r.total_flops as f64))
                    .collect();
                let comm: Vec<_> = xs
                    .iter()
                    .zip(rows)
                    .map(|(&x, r)| (x, r.total_intermediate_elements as f64))
                    .collect();
                Ok((
                    Some(fit_scaling_exponent(&flops)?),
                    Some(fit_scaling_exponent(&comm)?),
                ))
            }
            _ => Ok((None, None)),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "axis_value,n,d_dims,target_d,workers,iterations_used,total_flops,total_intermediate_elements,total_intermediate_bytes,subspace_error\n",
        );
        for r in &self.rows {
            let axis = r.axis_value.map(|v| v.to_string()).unwrap_or_default();
            let err = r
                .subspace_error
                .map(|e| format!("{e:e}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{axis},{},{},{},{},{},{},{},{},{err}",
                r.n,
                r.d_dims,
                r.target_d,
                r.workers,
                r.iterations_used,
                r.total_flops,
                r.total_intermediate_elements,
                r.total_intermediate_bytes
            );
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }

    /// Short human-readable digest.
    pub fn summary(&self) -> String {
        let mut s = format!("method={} points={}", self.method, self.rows.len());
        if let (Some(axis), Some(f), Some(c)) =
            (self.axis, self.flop_exponent, self.communication_exponent)
        {
            let _ = write!(
                s,
                " flop_exponent[{axis}]={f:.3} communication_exponent[{axis}]={c:.3}"
            );
        }
        if let Some(worst) = self
            .rows
            .iter()
            .filter_map(|r| r.subspace_error)
            .reduce(f64::max)
        {
            let _ = write!(s, " max_subspace_error={worst:.3e}");
        }
        s
    }
}

/// Loads the configured input file or generates the synthetic matrix for `pt`.
pub fn dataset(cfg: &ExperimentConfig, pt: &Point) -> Result<Matrix> {
    match &cfg.input {
        Some(path) => {
            let format = match cfg.input_format.or_else(|| MatrixFormat::from_path(path)) {
                Some(f) => f,
                None => return invalid(format!("cannot tell the format of {}", path.display())),
            };
            let a = load_matrix(path, format)?;
            cfg.check_size(a.rows(), a.cols())?;
            Ok(a)
        }
        None => {
            cfg.check_size(pt.n, pt.d_dims)?;
            gen_synthetic(
                pt.n,
                pt.d_dims,
                cfg.rank.unwrap_or(pt.target_d),
                cfg.noise,
                cfg.seed,
            )
        }
    }
}

/// Runs a single point through the simulator.
pub fn run_point(cfg: &ExperimentConfig, pt: &Point) -> Result<(Matrix, PcaResult, CostReport)> {
    let a = dataset(cfg, pt)?;
    let (result, report) = run_phased(&cfg.method_at(pt), &a, pt.workers)?;
    Ok((a, result, report))
}

fn sweep_row(cfg: &ExperimentConfig, axis_value: Option<usize>, pt: &Point) -> Result<SweepRow> {
    let (a, result, report) = run_point(cfg, pt)?;
    let subspace_error = match cfg.method {
        MethodTag::CovEig => None,
        _ => {
            let oracle = pca_cov_eig(&a, pt.target_d)?;
            Some(largest_principal_angle(
                &oracle.components,
                &result.components,
            )?)
        }
    };
    Ok(SweepRow {
        axis_value,
        n: a.rows(),
        d_dims: a.cols(),
        target_d: pt.target_d,
        workers: pt.workers,
        iterations_used: result.iterations_used,
        total_flops: report.totals.flops,
        total_intermediate_elements: report.totals.intermediate_elements,
        total_intermediate_bytes: report.totals.intermediate_bytes,
        subspace_error,
    })
}

/// Runs every sweep point in order and fits the scaling exponents.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let axis = cfg.sweep()?.map(|s| s.axis);
    let mut rows = Vec::new();
    for (value, pt) in cfg.points()? {
        let row = sweep_row(cfg, value, &pt).map_err(|e| Error::SweepPoint {
            point: match (axis, value) {
                (Some(a), Some(v)) => format!("{a}={v}"),
                _ => "base".to_string(),
            },
            source: Box::new(e),
        })?;
        rows.push(row);
    }
    let (flop_exponent, communication_exponent) = SweepReport::fit_exponents(&rows)?;
    Ok(SweepReport {
        method: cfg.method.as_str(),
        axis: axis.map(|a| a.as_str()),
        rows,
        flop_exponent,
        communication_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn coveig_communication_in_d() {
        let c = cfg(
            "method=coveig\nn=256\ntarget_d=2\nworkers=2\nsweep_axis=D\nsweep_values=8,16,32,64",
        );
        let r = run_experiment(&c).unwrap();
        let q = r.communication_exponent.unwrap();
        assert!((q - 2.0).abs() < 0.2, "{q}");
        assert!(r.rows.iter().all(|row| row.subspace_error.is_none()));
    }

    #[test]
    fn ppca_recompute_communication_flat_in_n() {
        let c = cfg(
            "method=ppca\nmode=recompute\nd_dims=8\ntarget_d=2\nworkers=2\nnoise=0.1\niters=5\ntol=1e-300\nsweep_axis=N\nsweep_values=128,256,512",
        );
        let r = run_experiment(&c).unwrap();
        let q = r.communication_exponent.unwrap();
        assert!(q.abs() < 0.1, "{q}");
    }

    #[test]
    fn single_point_has_no_exponents() {
        let r = run_experiment(&cfg("method=ssvd\nn=40\nd_dims=8\ntarget_d=2\np=2")).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.flop_exponent, None);
        assert!(!r.to_json().contains("exponent"));
        assert!(r.rows[0].subspace_error.unwrap() < 1e-6);
    }

    #[test]
    fn exponents_recomputable_from_rows() {
        let c = cfg("method=svd\nn=64\ntarget_d=2\nsweep_axis=D\nsweep_values=4,8,16,32");
        let r = run_experiment(&c).unwrap();
        let (f, q) = SweepReport::fit_exponents(&r.rows).unwrap();
        assert_eq!((f, q), (r.flop_exponent, r.communication_exponent));
        assert_eq!(r.to_csv().lines().count(), 5);
    }

    #[test]
    fn failing_point_is_named() {
        // d = 8 is not below D = 8 for ppca
        let c = cfg("method=ppca\nn=30\nd_dims=8\nsweep_axis=d\nsweep_values=2,4,8");
        match run_experiment(&c) {
            Err(Error::SweepPoint { point, source }) => assert_eq!(point, "d=8", "{source}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn guardrail_blocks_big_points() {
        let c = cfg("n=20000\nd_dims=1000");
        assert!(run_experiment(&c).is_err());
    }
}
