//! `kepler-euler`: verification suites, simulations and comparisons for the
//! Kepler–Euler flow.
//!
//! Exit codes: 0 success, 1 a check or integration failed, 2 usage or
//! configuration error.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use kepler_euler::suite::Check;
use std::path::PathBuf;
use std::process::ExitCode;

pub const VERSION: &str = env!("KEPLER_EULER_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problem (exit 2).
    Config(String),
    /// A check or integration failed (exit 1).
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<kepler_euler::Error> for CliError {
    fn from(e: kepler_euler::Error) -> Self {
        use kepler_euler::Error as E;
        match e {
            E::InvalidConfig(_) | E::EnergyMismatch { .. } | E::EnergyBelowPotential { .. } | E::OutOfDomain { .. } => {
                CliError::Config(format!("{}: {e}", e.name()))
            }
            _ => CliError::Failure(format!("{}: {e}", e.name())),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "kepler-euler", version = VERSION, about = "Verify and simulate the regularized Kepler flow as a Beltrami field")]
struct Cli {
    /// JSON config file with sections `verify`, `simulate`, `compare`,
    /// `average_metric` and `classify`; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for relative output paths [default: $KEPLER_EULER_OUT_DIR, else the working directory]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run pointwise verification checks on the lifted regime c
    Verify(VerifyArgs),
    /// Integrate the regularized (bundle) or direct Kepler flow to CSV
    Simulate(SimulateArgs),
    /// Compare direct and regularized position traces
    Compare(CompareArgs),
    /// Haar-average a symmetry-breaking reconstructed metric over the Kepler circle action
    AverageMetric(AverageArgs),
    /// Classify a bundle trajectory as a horizontal, vertical or oblique geodesic
    Classify(ClassifyArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Energy regime c
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Run every check (the default when no selection is given)
    #[arg(long, conflicts_with = "which")]
    pub all: bool,
    /// Comma-separated checks: beltrami, contact, adapted, divergence, curvature, equivariance
    #[arg(long, value_delimiter = ',')]
    pub which: Option<Vec<Check>>,
    /// Samples per sweep [default: 1000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sampling seed [default: 1592598564]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the JSON report here
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Energy regime c (bundle mode)
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Integrate the direct Kepler flow in (q, p) instead of the bundle flow
    #[arg(long)]
    pub direct: bool,
    /// Bundle state x1 x2 alpha
    #[arg(long, num_args = 3, allow_hyphen_values = true, value_names = ["X1", "X2", "ALPHA"])]
    pub state: Option<Vec<f64>>,
    /// Position q1 q2
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["Q1", "Q2"])]
    pub q: Option<Vec<f64>>,
    /// Momentum p1 p2
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["P1", "P2"])]
    pub p: Option<Vec<f64>>,
    /// Final time [default: 10]
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Largest integrator step [default: 0.05]
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Absolute and relative tolerance [default: 1e-10]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Classify the orbit as periodic or escaping
    #[arg(long)]
    pub detect_period: bool,
    /// CSV output path; the sidecar JSON takes the same stem [default: trajectory.csv]
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Energy regime c; must equal H(q, p)
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["Q1", "Q2"])]
    pub q: Option<Vec<f64>>,
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["P1", "P2"])]
    pub p: Option<Vec<f64>>,
    /// Physical time span [default: 2π]
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Also write the JSON report here
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AverageArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Probe points [default: 8]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Trapezoid nodes on the circle [default: 64]
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Sampling seed [default: 1592598564]
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// CSV trajectory with header t,x1,x2,alpha (as written by `simulate`)
    #[arg(long, conflicts_with = "state")]
    pub input: Option<PathBuf>,
    /// Start x1 x2 alpha for a generated trajectory of X_c + drift ∂α
    #[arg(long, num_args = 3, allow_hyphen_values = true, value_names = ["X1", "X2", "ALPHA"])]
    pub state: Option<Vec<f64>>,
    /// Extra fiber angular velocity added to the Reeb field [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub fiber_drift: Option<f64>,
    /// Length of the generated trajectory [default: 1]
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = config::ConfigFile::load(cli.config.as_deref()).and_then(|file| {
        let out = cli.out_dir.as_deref();
        match &cli.command {
            Command::Verify(a) => commands::verify(a, file.verify, out),
            Command::Simulate(a) => commands::simulate(a, file.simulate, out),
            Command::Compare(a) => commands::compare(a, file.compare, out),
            Command::AverageMetric(a) => commands::average_metric(a, file.average_metric, out),
            Command::Classify(a) => commands::classify(a, file.classify, out),
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let msg = match &e {
                CliError::Config(m) => format!("configuration error: {m}\n\nRun `kepler-euler --help` for usage."),
                CliError::Failure(m) => format!("failed: {m}"),
            };
            eprintln!("{msg}");
            ExitCode::from(e.code())
        }
    }
}
