//! `kspm`: command-line front end for the Kadanoff sand pile toolkit.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "kspm", version, about = "Kadanoff sand pile model: fixed points, avalanches, traces and waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fixed point π(N) as differences and heights.
    Pi(PiArgs),
    /// The k-th avalanche from π(k-1).
    Avalanche(AvalancheArgs),
    /// Global density column 𝓛(D,N) and the long avalanches.
    Density(DensityArgs),
    /// Trace up to N on the interval I_i.
    Trace(TraceArgs),
    /// Apply the transducer to a word, or list its edges.
    Transduce(TransduceArgs),
    /// One row per avalanche up to N_max.
    Raster(RasterArgs),
    /// Wave suffixes predicted from regular traces against π(N).
    Predict(PredictArgs),
    /// Run the property and acceptance suite.
    Verify(VerifyArgs),
    /// Wave-onset scan as CSV, with the density bound for D = 3.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Ascii,
    Svg,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Model parameter D >= 2.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PiArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of grains.
    #[arg(long)]
    pub n: u64,
    /// Recompute π(N) by exact simulation and compare with the fast path.
    #[arg(long)]
    pub verify_preconditions: bool,
}

#[derive(Args, Debug)]
pub struct AvalancheArgs {
    #[command(flatten)]
    pub common: Common,
    /// Avalanche index, at least 1.
    #[arg(long)]
    pub k: u64,
    /// Check the peak-chain prediction against the simulated avalanche.
    #[arg(long)]
    pub verify_preconditions: bool,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: u64,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: u64,
    /// Interval index.
    #[arg(long)]
    pub i: usize,
    /// Reject intervals left of the zone where types are defined.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub verify_preconditions: bool,
}

#[derive(Args, Debug)]
pub struct TransduceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input word; read from standard input when absent.
    #[arg(long)]
    pub word: Option<String>,
    /// Number of applications of the transducer.
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
    /// Print the transducer edges instead of transducing.
    #[arg(long)]
    pub edges: bool,
}

#[derive(Args, Debug)]
pub struct RasterArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub nmax: u64,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: u64,
    /// Only this interval.
    #[arg(long)]
    pub i: Option<usize>,
    /// Reject intervals left of the wave zone.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub verify_preconditions: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Reduced horizons.
    #[arg(long)]
    pub quick: bool,
    /// Seed of the random word generator.
    #[arg(long, default_value_t = kspm::verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Also fail on reference values the model does not reproduce.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub nmax: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Pi(a) => commands::pi(a),
        Command::Avalanche(a) => commands::avalanche(a),
        Command::Density(a) => commands::density(a),
        Command::Trace(a) => commands::trace(a),
        Command::Transduce(a) => commands::transduce(a),
        Command::Raster(a) => commands::raster(a),
        Command::Predict(a) => commands::predict(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
