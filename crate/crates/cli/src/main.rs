//! `bmm`: quotes, sweeps and simulations for power-law AMM pools.
//!
//! Exit codes: 0 success, 2 usage or validation error, 1 runtime error.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::error::CliError;
use crate::output::Format;

/// Overrides the default output directory (the current directory).
pub const OUTPUT_DIR_ENV: &str = "BMM_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "bmm", version, about = "Power-law AMM and dynamic rebate toolkit")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Primary output file. Companion files are written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price a single swap.
    Quote(QuoteArgs),
    /// Liquidity retention ratio over a price-multiplier grid.
    SweepRetention(SweepArgs),
    /// Impermanent loss (traditional, scaled, exact) over a price-multiplier grid.
    SweepIl(SweepArgs),
    /// Static versus dynamic rebate daily volume simulation.
    SimulateDrs(DrsArgs),
    /// Pool plus fee engine loop on a seeded trade stream.
    MarketLoop(MarketArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("side").required(true).args(["buy_x", "sell_x"])))]
pub struct QuoteArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub y: f64,
    #[arg(long)]
    pub n: u32,
    /// Pay stablecoin, receive the volatile token.
    #[arg(long)]
    pub buy_x: bool,
    /// Pay the volatile token, receive stablecoin.
    #[arg(long)]
    pub sell_x: bool,
    /// Input amount, in units of the asset paid in.
    #[arg(long = "in", allow_negative_numbers = true)]
    pub amount_in: f64,
    #[arg(long, default_value_t = 0.0)]
    pub fee: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Exponents to sweep, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    pub n_values: Option<Vec<u32>>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DrsArgs {
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long)]
    pub noise_std: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MarketArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Expected trades per period.
    #[arg(long)]
    pub intensity: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub(crate) type CliResult<T = ()> = Result<T, CliError>;
