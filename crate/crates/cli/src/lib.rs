//! Command-line front end for the `wbary` library.

pub mod commands;
pub mod error;
pub mod io;
pub mod spec;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "wbary",
    version,
    about = "Empirical Wasserstein barycenters of grouped samples"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Squared Wasserstein distance between two measures.
    Distance(DistanceArgs),
    /// Barycenter of a grouped dataset.
    Barycenter(BarycenterArgs),
    /// Exact risk and upper bounds of the non-smoothed barycenter.
    RiskExact(RiskExactArgs),
    /// Monte Carlo risk of the estimators under a simulation model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorName {
    Nonsmoothed,
    Smoothed,
    Parametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    BoundaryGaussian,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Sample list or quantile file.
    pub file_a: PathBuf,
    pub file_b: PathBuf,
    /// α-cells of the quadrature rule, when no exact path applies.
    #[arg(long)]
    pub grid_size: Option<usize>,
}

/// Options shared by `barycenter` and `simulate`. Smoothing options are only valid
/// with the smoothed estimator, `--reference` only with the parametric one.
#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "nonsmoothed")]
    pub estimator: Vec<EstimatorName>,
    /// Defaults to boundary-gaussian.
    #[arg(long, value_enum)]
    pub kernel: Option<KernelName>,
    /// silverman, cv or fixed:<h>; defaults to cv.
    #[arg(long)]
    pub bandwidth: Option<String>,
    /// α-midpoints of the smoothed barycenter; defaults to 4096.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Reference law of the parametric estimator, e.g. gaussian:0,1.
    #[arg(long)]
    pub reference: Option<String>,
}

#[derive(Debug, Args)]
pub struct BarycenterArgs {
    /// One unit per line.
    pub dataset: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiskExactArgs {
    /// uniform, gaussian or exponential, with optional parameters.
    #[arg(long)]
    pub distribution: String,
    #[arg(long)]
    pub n: usize,
    /// Common sample size, or one size per unit.
    #[arg(long)]
    pub p: String,
    /// Integrated variance of the unit quantile functions.
    #[arg(long = "V", default_value_t = 0.0)]
    pub v: f64,
    /// E[J2(nu)], needed by the distance bounds.
    #[arg(long)]
    pub expected_j2: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Number of units, one value or a list.
    #[arg(long)]
    pub n: String,
    /// Unit sample size, one value or a list.
    #[arg(long)]
    pub p: String,
    /// Monte Carlo replications per cell.
    #[arg(long = "M", default_value_t = 100)]
    pub replications: usize,
    #[arg(long)]
    pub seed: u64,
    /// Full factorial sweep over the n and p lists instead of paired cells.
    #[arg(long)]
    pub grid: bool,
    /// Also write the surface log(risk(nonsmoothed) / risk(smoothed)) as CSV to this file.
    #[arg(long)]
    pub ratio: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

/// Runs the parsed command, writing results to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let text = match cli.command {
        Command::Distance(a) => commands::cmd_distance(&a)?,
        Command::Barycenter(a) => commands::cmd_barycenter(&a)?,
        Command::RiskExact(a) => commands::cmd_risk_exact(&a)?,
        Command::Simulate(a) => commands::cmd_simulate(&a)?,
    };
    print!("{text}");
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
