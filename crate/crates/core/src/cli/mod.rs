//! The `pcl` command-line front end.
//!
//! [`run`] takes the argument list and the two output streams and returns the
//! process exit code, so the binary is a one-liner and tests can drive the
//! CLI in-process.

mod commands;
pub use commands::{sweep_record, SweepRecord};
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use config::{Format, OutputGroup, Scale};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Numerical { context: String, source: Error },
    #[error("output: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub(crate) fn numerical(context: impl Into<String>) -> impl FnOnce(Error) -> CliError {
        let context = context.into();
        move |source| CliError::Numerical { context, source }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pcl",
    version,
    about = "Mutual information, low-energy expansions and energy per bit for the discrete-time Poisson channel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the signal energy and tabulate mutual information and energy per bit.
    Mi(MiArgs),
    /// Closed-form and measured low-energy expansion coefficients.
    Coeffs(CoeffsArgs),
    /// Bracket the noiseless capacity between flash signalling and an upper bound.
    Capacity(CapacityArgs),
    /// Capacity per unit energy and minimum energy per bit.
    Unitcost(UnitcostArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML recipe; flags given on the command line take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Absolute error tolerance in nats [default: $PCL_DEFAULT_TOL or 1e-12].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub eps_start: Option<f64>,
    #[arg(long)]
    pub eps_stop: Option<f64>,
    #[arg(long)]
    pub eps_points: Option<usize>,
    #[arg(long, value_enum)]
    pub eps_scale: Option<Scale>,
}

#[derive(Debug, Args)]
pub struct MiArgs {
    /// pem:M, flash:P or file:PATH; repeat for several series.
    #[arg(long)]
    pub constellation: Vec<String>,
    /// none, poisson:EPS_N or geometric:EPS_N; repeat for several series.
    #[arg(long)]
    pub noise: Vec<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Column groups to emit [default: mi,ebit,coeffs,bounds].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub outputs: Option<Vec<OutputGroup>>,
    /// Rescale constellations to unit mean amplitude.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub constellation: Option<String>,
    #[arg(long)]
    pub noise: Option<String>,
    /// Extraction energies [default: 1e-5, 1e-4, 1e-3].
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Report where the flash ratio with p = -eps ln eps reaches --level,
    /// working with t = -ln eps so that energies below 1e-308 are reachable.
    #[arg(long)]
    pub logdomain: bool,
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Args)]
pub struct UnitcostArgs {
    #[arg(long)]
    pub noise: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Mi(a) => commands::mi(a, out),
        Command::Coeffs(a) => commands::coeffs(a, out),
        Command::Capacity(a) => commands::capacity(a, out),
        Command::Unitcost(a) => commands::unitcost(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "pcl: {e}");
            e.exit_code()
        }
    }
}
