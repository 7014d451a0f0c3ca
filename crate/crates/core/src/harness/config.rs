//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # CovEig communication in D
//! method = coveig
//! n = 256
//! target_d = 2
//! workers = 2
//! sweep_axis = D
//! sweep_values = 8, 16, 32, 64
//! ```
//!
//! Keys match the command-line flags (`d-dims` and `d_dims` are the same
//! key), so flags are applied as overrides with [`ExperimentConfig::set`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::harness::io::MatrixFormat;
use crate::pca::{Method, MethodTag, PpcaMode, PpcaParams, SsvdParams};

/// Largest `N * D` a sweep point may have unless raised.
pub const DEFAULT_MAX_ELEMS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => invalid(format!(
                "unknown report format {other:?}, expected json or csv"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    N,
    D,
    TargetD,
    Workers,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::N => "N",
            SweepAxis::D => "D",
            SweepAxis::TargetD => "d",
            SweepAxis::Workers => "P",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "n" => Ok(SweepAxis::N),
            "D" | "d_dims" | "d-dims" => Ok(SweepAxis::D),
            "d" | "target_d" | "target-d" => Ok(SweepAxis::TargetD),
            "P" | "p_workers" | "workers" => Ok(SweepAxis::Workers),
            other => invalid(format!(
                "unknown sweep axis {other:?}, expected N, D, d or P"
            )),
        }
    }
}

pub fn parse_method_tag(s: &str) -> Result<MethodTag> {
    match s {
        "coveig" => Ok(MethodTag::CovEig),
        "svd" => Ok(MethodTag::SvdBidiag),
        "ssvd" => Ok(MethodTag::Ssvd),
        "ppca" => Ok(MethodTag::Ppca),
        other => invalid(format!(
            "unknown method {other:?}, expected coveig, svd, ssvd or ppca"
        )),
    }
}

pub fn parse_mode(s: &str) -> Result<PpcaMode> {
    match s {
        "standard" => Ok(PpcaMode::Standard),
        "recompute" => Ok(PpcaMode::Recompute),
        other => invalid(format!(
            "unknown ppca mode {other:?}, expected standard or recompute"
        )),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<usize>,
}

/// Problem size and method parameters of one sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Point {
    pub n: usize,
    pub d_dims: usize,
    pub target_d: usize,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub method: MethodTag,
    pub n: usize,
    pub d_dims: usize,
    /// Rank of the synthetic signal; defaults to the target dimensionality.
    pub rank: Option<usize>,
    pub noise: f64,
    pub seed: u64,
    /// Load the data from this file instead of generating it.
    pub input: Option<PathBuf>,
    pub input_format: Option<MatrixFormat>,
    pub target_d: usize,
    pub p: usize,
    pub j: usize,
    pub iters: usize,
    pub tol: f64,
    pub mode: PpcaMode,
    pub workers: usize,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Vec<usize>,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub max_elems: u64,
    pub allow_large: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            method: MethodTag::CovEig,
            n: 256,
            d_dims: 16,
            rank: None,
            noise: 0.0,
            seed: 1,
            input: None,
            input_format: None,
            target_d: 2,
            p: 5,
            j: 2,
            iters: 100,
            tol: 1e-6,
            mode: PpcaMode::Standard,
            workers: 1,
            sweep_axis: None,
            sweep_values: Vec::new(),
            out: None,
            format: ReportFormat::Json,
            max_elems: DEFAULT_MAX_ELEMS,
            allow_large: false,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .or_else(|_| invalid(format!("{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => invalid(format!("{key}: expected true or false, got {value:?}")),
    }
}

impl ExperimentConfig {
    /// Parses a config file body; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected key = value, got {body:?}"),
                });
            };
            let key = key.trim().replace('-', "_");
            if seen.contains(&key) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key {key}"),
                });
            }
            cfg.set(&key, value.trim()).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            seen.push(key);
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "method" => self.method = parse_method_tag(value)?,
            "n" => self.n = num(key, value)?,
            "d_dims" => self.d_dims = num(key, value)?,
            "rank" => self.rank = Some(num(key, value)?),
            "noise" => self.noise = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "input_format" => self.input_format = Some(value.parse()?),
            "target_d" => self.target_d = num(key, value)?,
            "p" => self.p = num(key, value)?,
            "j" => self.j = num(key, value)?,
            "iters" => self.iters = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "mode" => self.mode = parse_mode(value)?,
            "workers" => self.workers = num(key, value)?,
            "sweep_axis" => self.sweep_axis = Some(value.parse()?),
            "sweep_values" => {
                self.sweep_values = value
                    .split(',')
                    .map(|v| num(key, v.trim()))
                    .collect::<Result<_>>()?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "max_elems" => self.max_elems = num(key, value)?,
            "allow_large" => self.allow_large = flag(key, value)?,
            other => return invalid(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    pub fn sweep(&self) -> Result<Option<Sweep>> {
        match (self.sweep_axis, self.sweep_values.is_empty()) {
            (None, true) => Ok(None),
            (None, false) => invalid("sweep_values given without sweep_axis"),
            (Some(_), true) => invalid("sweep_axis given without sweep_values"),
            (Some(axis), false) => Ok(Some(Sweep {
                axis,
                values: self.sweep_values.clone(),
            })),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(sweep) = self.sweep()? {
            if sweep.values.len() < 3 {
                return invalid(format!(
                    "a sweep needs at least 3 values, got {}",
                    sweep.values.len()
                ));
            }
            if sweep.values.windows(2).any(|w| w[0] >= w[1]) {
                return invalid("sweep values must be strictly increasing");
            }
            if sweep.values[0] == 0 {
                return invalid("sweep values must be positive");
            }
            if self.input.is_some() && matches!(sweep.axis, SweepAxis::N | SweepAxis::D) {
                return invalid("cannot sweep N or D over a matrix loaded from a file");
            }
        }
        if self.input.is_none() && (self.n == 0 || self.d_dims == 0) {
            return invalid("n and d_dims must be positive");
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return invalid(format!("noise must be finite and >= 0, got {}", self.noise));
        }
        Ok(())
    }

    /// The base point with the sweep axis set to each value in turn, or just
    /// the base point when there is no sweep.
    pub fn points(&self) -> Result<Vec<(Option<usize>, Point)>> {
        let base = Point {
            n: self.n,
            d_dims: self.d_dims,
            target_d: self.target_d,
            workers: self.workers,
        };
        Ok(match self.sweep()? {
            None => vec![(None, base)],
            Some(s) => s
                .values
                .iter()
                .map(|&v| {
                    let mut pt = base;
                    match s.axis {
                        SweepAxis::N => pt.n = v,
                        SweepAxis::D => pt.d_dims = v,
                        SweepAxis::TargetD => pt.target_d = v,
                        SweepAxis::Workers => pt.workers = v,
                    }
                    (Some(v), pt)
                })
                .collect(),
        })
    }

    pub fn method_at(&self, pt: &Point) -> Method {
        match self.method {
            MethodTag::CovEig => Method::CovEig { d: pt.target_d },
            MethodTag::SvdBidiag => Method::SvdBidiag { d: pt.target_d },
            MethodTag::Ssvd => Method::Ssvd(SsvdParams {
                d: pt.target_d,
                p: self.p,
                j: self.j,
                seed: self.seed,
            }),
            MethodTag::Ppca => Method::Ppca(PpcaParams {
                d: pt.target_d,
                max_iter: self.iters,
                tol: self.tol,
                mode: self.mode,
                seed: self.seed,
            }),
        }
    }

    /// Refuses points above the element budget unless `allow_large` is set.
    pub fn check_size(&self, n: usize, d_dims: usize) -> Result<()> {
        let elems = n as u64 * d_dims as u64;
        if elems > self.max_elems && !self.allow_large {
            return invalid(format!(
                "N*D = {elems} exceeds the limit of {} elements; raise PCA_COSTLAB_MAX_ELEMS or pass --allow-large",
                self.max_elems
            ));
        }
        Ok(())
    }
}
