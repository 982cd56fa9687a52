//! Command-line driver: configures geometry, quadrature and sweeps, runs
//! the verification and moment studies, and writes machine-readable
//! reports.
//!
//! Exit codes: 0 all checks passed, 1 a verification check failed,
//! 2 invalid configuration, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsishape::config::{CommandKind, ExperimentConfig, OutputFormat};
use fsishape::moments::StudyTarget;
use fsishape::runner;

#[derive(Parser)]
#[command(
    name = "fsishape",
    version,
    about = "Shape-calculus verification and moment studies for the solid-fluid benchmark",
    long_about = None
)]
struct Cli {
    /// Configuration file (flat `key = value` lines, `#` comments).
    /// Command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Perturbation sizes, comma separated and strictly decreasing
    /// (default 0.2,0.1,0.05,0.025).
    #[arg(long, global = true, value_name = "LIST")]
    eps: Option<String>,

    /// Monte Carlo sample count (default 100000).
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Master seed; all randomness derives from it (default 42).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Volume-quadrature cells per unit length (default 16).
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Gauss points per direction per quadrature cell (default 5).
    #[arg(long, global = true, value_name = "D")]
    quad_degree: Option<usize>,

    /// Gauss nodes per boundary segment (default 64).
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// Perturbation size of the verification sample (default 0.1).
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// First perturbation amplitude in [-1, 1] (default 1).
    #[arg(long, global = true)]
    amplitude: Option<f64>,

    /// Second perturbation amplitude in [-1, 1] (default 1).
    #[arg(long, global = true)]
    amplitude_b: Option<f64>,

    /// Output directory for reports (default `reports`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Output format: `json` (records only) or `csv` (plus plot tables).
    #[arg(long, global = true, value_name = "csv|json")]
    format: Option<String>,

    /// Multiplier on the residual tolerances (0 forces failures; useful
    /// for exercising the nonzero exit paths).
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Residuals of the first-order sensitivity identities.
    VerifyDerivative,
    /// Residuals of the second-order sensitivity identities.
    VerifyHessian,
    /// Quadrature values and invariants of the coupled bilinear forms.
    BilinearForms,
    /// Functional-derivative (boundary variation) quotient studies.
    Hadamard,
    /// Quadrature vs Monte Carlo moment estimates at the standard points.
    Moments,
    /// Convergence-order study of the chosen target.
    Convergence {
        /// mean | variance | taylor-remainder
        #[arg(long, default_value = "mean")]
        target: String,
    },
    /// Every study in sequence.
    All,
}

fn build_config(cli: &Cli) -> fsishape::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::parse_key_values(&text)?
        }
        None => ExperimentConfig::default(),
    };

    match &cli.command {
        Some(Command::VerifyDerivative) => cfg.command = CommandKind::VerifyDerivative,
        Some(Command::VerifyHessian) => cfg.command = CommandKind::VerifyHessian,
        Some(Command::BilinearForms) => cfg.command = CommandKind::BilinearForms,
        Some(Command::Hadamard) => cfg.command = CommandKind::Hadamard,
        Some(Command::Moments) => cfg.command = CommandKind::Moments,
        Some(Command::Convergence { target }) => {
            cfg.command = CommandKind::Convergence;
            cfg.target = match target.as_str() {
                "mean" => StudyTarget::Mean,
                "variance" => StudyTarget::Variance,
                "taylor-remainder" => StudyTarget::TaylorRemainder,
                other => {
                    return Err(fsishape::Error::InvalidConfig(format!(
                        "target: unknown value '{other}'"
                    )))
                }
            };
        }
        Some(Command::All) | None => cfg.command = CommandKind::All,
    }

    if let Some(eps) = &cli.eps {
        cfg.eps_list = eps
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| fsishape::Error::InvalidConfig(format!("eps: cannot parse '{s}'")))
            })
            .collect::<fsishape::Result<Vec<_>>>()?;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.grid {
        cfg.grid = v;
    }
    if let Some(v) = cli.quad_degree {
        cfg.quad_degree = v;
    }
    if let Some(v) = cli.nodes {
        cfg.nodes_per_segment = v;
    }
    if let Some(v) = cli.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = cli.amplitude {
        cfg.amplitude = v;
    }
    if let Some(v) = cli.amplitude_b {
        cfg.amplitude_b = v;
    }
    if let Some(dir) = &cli.out {
        cfg.out_dir = dir.clone();
    }
    if let Some(f) = &cli.format {
        cfg.format = OutputFormat::parse(f)?;
    }
    if let Some(v) = cli.tolerance_scale {
        cfg.tolerance_scale = v;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };

    let result = runner::run(&cfg);
    match &result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.all_passed {
                println!("all checks passed");
            } else {
                for f in &outcome.failures {
                    eprintln!("FAILED: {f}");
                }
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(runner::exit_code(&result) as u8)
}
