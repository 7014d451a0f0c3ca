use std::fmt::Write as _;

use serde::Serialize;

use super::Phase;
use crate::pca::{Method, PpcaMode};

const BYTES_PER_ELEMENT: u64 = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub flops: u64,
    pub intermediate_elements: u64,
    pub intermediate_bytes: u64,
    /// Elements counting each broadcast once per receiving worker.
    pub fanout_elements: u64,
}

/// Problem and method parameters the report was produced with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamsEcho {
    pub method: &'static str,
    pub n: usize,
    pub d_dims: usize,
    pub target_d: usize,
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversampling: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<PpcaMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub iterations_used: usize,
}

impl ParamsEcho {
    pub fn new(
        method: &Method,
        n: usize,
        d_dims: usize,
        workers: usize,
        iterations_used: usize,
    ) -> Self {
        let mut echo = ParamsEcho {
            method: method.tag().as_str(),
            n,
            d_dims,
            target_d: method.target_dim(),
            workers,
            oversampling: None,
            power_iterations: None,
            max_iter: None,
            tol: None,
            mode: None,
            seed: None,
            iterations_used,
        };
        match method {
            Method::Ssvd(p) => {
                echo.oversampling = Some(p.p);
                echo.power_iterations = Some(p.j);
                echo.seed = Some(p.seed);
            }
            Method::Ppca(p) => {
                echo.max_iter = Some(p.max_iter);
                echo.tol = Some(p.tol);
                echo.mode = Some(p.mode);
                echo.seed = Some(p.seed);
            }
            Method::CovEig { .. } | Method::SvdBidiag { .. } => {}
        }
        echo
    }
}

/// Per-phase flops and intermediate data of one simulated run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub phases: Vec<Phase>,
    pub totals: Totals,
    pub params_echo: ParamsEcho,
}

impl CostReport {
    pub fn new(phases: Vec<Phase>, params_echo: ParamsEcho) -> Self {
        let totals = Self::sum(&phases);
        CostReport {
            phases,
            totals,
            params_echo,
        }
    }

    fn sum(phases: &[Phase]) -> Totals {
        let elements: u64 = phases.iter().map(Phase::emitted_elements).sum();
        Totals {
            flops: phases.iter().map(Phase::flops).sum(),
            intermediate_elements: elements,
            intermediate_bytes: elements * BYTES_PER_ELEMENT,
            fanout_elements: phases.iter().map(Phase::fanout_elements).sum(),
        }
    }

    /// Totals recomputed from the phase records.
    pub fn recompute_totals(&self) -> Totals {
        Self::sum(&self.phases)
    }

    pub fn phase(&self, name: &str) -> Option<&Phase> {
        self.phases.iter().find(|p| p.name == name)
    }

    /// Sum of a quantity over the phases whose name starts with `prefix`.
    pub fn elements_with_prefix(&self, prefix: &str) -> u64 {
        self.phases
            .iter()
            .filter(|p| p.name.starts_with(prefix))
            .map(Phase::emitted_elements)
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per phase. The fan-out column is included on request.
    pub fn to_csv(&self, with_fanout: bool) -> String {
        let mut out = String::from("phase_name,worker_flops_total,emitted_elements");
        if with_fanout {
            out.push_str(",fanout_elements");
        }
        out.push('\n');
        for p in &self.phases {
            let _ = write!(
                out,
                "{},{},{}",
                p.name,
                p.worker_flops_total(),
                p.emitted_elements()
            );
            if with_fanout {
                let _ = write!(out, ",{}", p.fanout_elements());
            }
            out.push('\n');
        }
        out
    }
}
