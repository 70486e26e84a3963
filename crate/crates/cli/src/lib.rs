//! Experiment runner for the `fas-kl` library: spectra, outage and capacity
//! sweeps, rate-distortion points, baseline comparisons and figure data.
//!
//! Every output is CSV with a header row. Writing to a file also writes a JSON
//! sidecar with the resolved configuration and modeling choices.

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use commands::{compare_table, curve_table, eig_table, finish, rd_table, Metric};
use config::{CommonArgs, Defaults};
use figures::FigureId;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;
/// Caps the rayon worker count; 0 or unset means one per core.
pub const THREADS_ENV: &str = "FAS_KL_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] fas_kl::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(fas_kl::Error::Numerical(_)) => EXIT_NUMERICAL,
            CliError::Lib(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fas-kl", version, about = "Karhunen-Loeve analysis of fluid antenna channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Jakes eigen-spectrum with cumulative power and entropy fractions.
    Eig(CommonArgs),
    /// Outage probability over an SNR grid.
    Outage(CommonArgs),
    /// Ergodic capacity over an SNR grid.
    Capacity(CommonArgs),
    /// Rate-distortion operating points of KL truncations.
    Rd(CommonArgs),
    /// Covariance error and outage bias of KL and block baselines.
    Compare(CommonArgs),
    /// Data for one of the standard figures.
    Figure {
        id: FigureId,
        #[command(flatten)]
        args: CommonArgs,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?;
    // A pool may already exist when embedded in a host process; keep it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Eig(a) => {
            let cfg = a.resolve(&Defaults::default())?;
            finish(&cfg, "eig", eig_table(&cfg)?, stdout)
        }
        Command::Outage(a) => {
            let cfg = a.resolve(&Defaults::default())?;
            finish(&cfg, "outage", curve_table(&cfg, &cfg.methods, Metric::Outage)?, stdout)
        }
        Command::Capacity(a) => {
            let cfg = a.resolve(&Defaults { trials: fas_kl::capacity::DEFAULT_TRIALS, ..Defaults::default() })?;
            finish(&cfg, "capacity", curve_table(&cfg, &cfg.methods, Metric::Capacity)?, stdout)
        }
        Command::Rd(a) => {
            let cfg = a.resolve(&Defaults::default())?;
            finish(&cfg, "rd", rd_table(&cfg)?, stdout)
        }
        Command::Compare(a) => {
            let cfg = a.resolve(&Defaults::default())?;
            finish(&cfg, "compare", compare_table(&cfg)?, stdout)
        }
        Command::Figure { id, args } => {
            let dir = figures::run(id, &args)?;
            writeln!(stdout, "{}", dir.display()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Parses and runs `args` (program name first) with output to `out`.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli, out)
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
