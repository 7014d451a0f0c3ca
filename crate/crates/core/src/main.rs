use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pca_costlab::harness::{
    gen_synthetic, run_experiment, run_point, save_matrix, ExperimentConfig, MatrixFormat,
    ReportFormat,
};
use pca_costlab::Result;

const MAX_ELEMS_ENV: &str = "PCA_COSTLAB_MAX_ELEMS";

#[derive(Parser)]
#[command(
    name = "pca-costlab",
    version,
    about = "PCA methods with flop and communication accounting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic low-rank matrix (.mtx or .csv, by extension).
    Gen(GenArgs),
    /// Run one method once and write its per-phase cost report.
    Run(ExpArgs),
    /// Run a scaling sweep and write the per-point table with fitted exponents.
    Sweep(ExpArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "d-dims")]
    d_dims: usize,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Raise the N*D limit for this invocation.
    #[arg(long)]
    allow_large: bool,
}

/// Flags override keys of the same name in the config file.
#[derive(Args)]
struct ExpArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["coveig", "svd", "ssvd", "ppca"])]
    method: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "d-dims")]
    d_dims: Option<usize>,
    #[arg(long = "target-d")]
    target_d: Option<usize>,
    /// SSVD oversampling.
    #[arg(long = "p")]
    p: Option<usize>,
    /// SSVD power iterations.
    #[arg(long = "j")]
    j: Option<usize>,
    /// PPCA iteration cap.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_parser = ["standard", "recompute"])]
    mode: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    /// Read the data matrix from a .mtx or .csv file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long = "sweep-axis", value_parser = ["N", "D", "d", "P"])]
    sweep_axis: Option<String>,
    /// Comma-separated, strictly increasing.
    #[arg(long = "sweep-values")]
    sweep_values: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    #[arg(long)]
    allow_large: bool,
}

impl ExpArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Ok(limit) = std::env::var(MAX_ELEMS_ENV) {
            cfg.set("max_elems", &limit)?;
        }
        let overrides: [(&str, Option<String>); 18] = [
            ("method", self.method.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("d_dims", self.d_dims.map(|v| v.to_string())),
            ("target_d", self.target_d.map(|v| v.to_string())),
            ("p", self.p.map(|v| v.to_string())),
            ("j", self.j.map(|v| v.to_string())),
            ("iters", self.iters.map(|v| v.to_string())),
            ("tol", self.tol.map(|v| v.to_string())),
            ("mode", self.mode.clone()),
            ("workers", self.workers.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("rank", self.rank.map(|v| v.to_string())),
            ("noise", self.noise.map(|v| v.to_string())),
            (
                "input",
                self.input.as_ref().map(|p| p.display().to_string()),
            ),
            ("sweep_axis", self.sweep_axis.clone()),
            ("sweep_values", self.sweep_values.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.allow_large {
            cfg.allow_large = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, body: &str, summary: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            println!("{summary}");
            println!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn gen(args: &GenArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    if let Ok(limit) = std::env::var(MAX_ELEMS_ENV) {
        cfg.set("max_elems", &limit)?;
    }
    cfg.allow_large = args.allow_large;
    cfg.check_size(args.n, args.d_dims)?;
    let a = gen_synthetic(args.n, args.d_dims, args.rank, args.noise, args.seed)?;
    let format = MatrixFormat::from_path(&args.out).unwrap_or(MatrixFormat::MatrixMarket);
    save_matrix(&a, &args.out, format)?;
    println!(
        "wrote {}x{} matrix to {}",
        a.rows(),
        a.cols(),
        args.out.display()
    );
    Ok(())
}

fn run(args: &ExpArgs) -> Result<()> {
    let cfg = args.config()?;
    if cfg.sweep()?.is_some() {
        return Err(pca_costlab::Error::InvalidInput(
            "the config defines a sweep; use the sweep subcommand".into(),
        ));
    }
    let (_, pt) = cfg.points()?[0];
    let (_, result, report) = run_point(&cfg, &pt)?;
    let body = match cfg.format {
        ReportFormat::Json => report.to_json() + "\n",
        ReportFormat::Csv => report.to_csv(false),
    };
    let summary = format!(
        "method={} N={} D={} d={} P={} iterations={} total_flops={} total_intermediate_elements={} top_value={:e}",
        result.method.as_str(),
        report.params_echo.n,
        report.params_echo.d_dims,
        report.params_echo.target_d,
        report.params_echo.workers,
        result.iterations_used,
        report.totals.flops,
        report.totals.intermediate_elements,
        result.values.first().copied().unwrap_or(0.0)
    );
    emit(cfg.out.as_deref(), &body, &summary)
}

fn sweep(args: &ExpArgs) -> Result<()> {
    let cfg = args.config()?;
    let report = run_experiment(&cfg)?;
    emit(
        cfg.out.as_deref(),
        &report.render(cfg.format),
        &report.summary(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
