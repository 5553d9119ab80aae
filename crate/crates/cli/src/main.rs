//! `zerolab`: run a zero-dynamics experiment and write its CSV/JSON artifacts
//! next to a manifest.

mod commands;
mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::FileConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "zerolab", version, about = "Zero dynamics under differentiation and averaging")]
struct Cli {
    /// Base seed; trial `t` draws from stream `t` of this seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run directory (default `runs/<experiment>`); for `report`, the directory to read.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// TOML file with per-experiment tables; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Rational arithmetic (kernel only).
    #[arg(long, global = true)]
    exact: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Differentiate a truncated product repeatedly and track its zeros.
    Flow(commands::flow::FlowArgs),
    /// Alternating midpoints or three-point averages of a noisy lattice.
    Avg(commands::avg::AvgArgs),
    /// Center masses of convolution powers of a smoothing kernel.
    Kernel(commands::kernel::KernelArgs),
    /// Predicted versus measured zero offsets for a perturbed lattice.
    Perturb(commands::perturb::PerturbArgs),
    /// Averaging of points on the circle, or the circle operator attractor.
    Circle(commands::circle::CircleArgs),
    /// Distance of high Bessel derivatives from their cosine form.
    Bessel(commands::bessel::BesselArgs),
    /// Summarize an existing run directory.
    Report,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let threads = cli.threads.or(file.threads);
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let ctx = Context {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out: cli.out,
        exact: cli.exact || file.exact.unwrap_or(false),
        file,
    };
    match &cli.command {
        Command::Flow(args) => commands::flow::run(&ctx, args),
        Command::Avg(args) => commands::avg::run(&ctx, args),
        Command::Kernel(args) => commands::kernel::run(&ctx, args),
        Command::Perturb(args) => commands::perturb::run(&ctx, args),
        Command::Circle(args) => commands::circle::run(&ctx, args),
        Command::Bessel(args) => commands::bessel::run(&ctx, args),
        Command::Report => commands::report::run(&ctx),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zerolab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
