//! `vps`: generate corpora, train and evaluate velocity-porosity supermodels,
//! and rerun the network-size ladders end to end.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vps::Error;

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const PARSE: u8 = 4;
    pub const DIMENSION: u8 = 5;
    pub const DIVERGED: u8 = 6;
}

#[derive(Debug, Parser)]
#[command(name = "vps", version, about = "Velocity-porosity supermodel experiments")]
pub struct Cli {
    /// Seed for data generation (gen) or initialization and shuffling (train).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// TOML config replacing the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Printed,
    Corrected,
}

impl From<Mode> for vps::transforms::RhoLawMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Printed => vps::transforms::RhoLawMode::AsPrinted,
            Mode::Corrected => vps::transforms::RhoLawMode::DolomiteSignCorrected,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a training corpus or a synthetic test log (CSV + .meta).
    Gen {
        #[arg(long, value_enum)]
        case: Case,
        /// Rows (case 1) or rows per lithology (case 2); block length with --testlog.
        #[arg(long)]
        n: Option<usize>,
        /// Dolomite density-law reading (case 2).
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Emit a labeled test log instead of a training corpus.
        #[arg(long)]
        testlog: bool,
    },
    /// Train a network on a dataset CSV.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Hidden layer widths, e.g. "9,15,9".
        #[arg(long)]
        net: String,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        val_fraction: Option<f64>,
        /// Model file path (default: <out>/model.vpsm).
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Evaluate a model on a dataset or labeled log.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Trace CSV path (default: <out>/trace.csv).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Generate, sweep the network-size ladder, and analyze a test log.
    Reproduce {
        #[arg(long, value_enum)]
        case: Case,
        /// Comma-separated training seeds (default from config).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Override the configured epoch budget.
        #[arg(long)]
        epochs: Option<usize>,
        /// Override the corpus size (rows, or rows per lithology).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Dump the lithology coefficient table as CSV.
    Table {
        #[arg(long, value_enum, default_value = "printed")]
        mode: Mode,
    },
}

pub fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::InvalidArgument(_) | Error::Domain { .. } => exit::USAGE,
        Error::Io { .. } => exit::IO,
        Error::Parse { .. }
        | Error::MissingColumn(_)
        | Error::MissingSection(_)
        | Error::UnsupportedVersion { .. }
        | Error::NonFinite(_)
        | Error::Empty(_) => exit::PARSE,
        Error::Dimension { .. } => exit::DIMENSION,
        Error::Diverged { .. } => exit::DIVERGED,
        Error::Untrained | Error::Stage { .. } => exit::OTHER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
