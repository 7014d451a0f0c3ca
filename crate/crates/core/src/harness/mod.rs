//! Experiment plumbing: synthetic data, matrix files, configs and sweeps.

pub mod config;
mod experiment;
pub mod io;
mod synthetic;

pub use config::{ExperimentConfig, Point, ReportFormat, Sweep, SweepAxis};
pub use experiment::{dataset, run_experiment, run_point, SweepReport, SweepRow};
pub use io::{load_matrix, save_matrix, MatrixFormat};
pub use synthetic::gen_synthetic;
