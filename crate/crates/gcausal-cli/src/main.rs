//! gcausal: config-driven experiments for group-level causal discovery on
//! multivariate time series.

mod commands;
mod config;
mod error;
mod io;

use clap::Parser;

#[derive(Parser)]
#[command(
    name = "gcausal",
    version,
    about = "Group-level causal discovery on multivariate time series",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Sample a synthetic benchmark system and write the dataset
    Simulate(commands::simulate::Args),
    /// Run knockoff-intervention discovery, optionally per regime
    Discover(commands::discover::Args),
    /// Run a canonical-correlation baseline (mc-vgc or mc-cdmi)
    Baseline(commands::baseline::Args),
    /// Sweep a simulator axis and score methods against the truth
    Benchmark(commands::benchmark::Args),
    /// Knockoff fidelity diagnostics and dimension sweep
    KnockoffDiag(commands::knockoff_diag::Args),
    /// Two-sample test sensitivity study
    TestBench(commands::test_bench::Args),
    /// Covariance regime segmentation
    Regimes(commands::regimes::Args),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Discover(args) => commands::discover::run(args),
        Command::Baseline(args) => commands::baseline::run(args),
        Command::Benchmark(args) => commands::benchmark::run(args),
        Command::KnockoffDiag(args) => commands::knockoff_diag::run(args),
        Command::TestBench(args) => commands::test_bench::run(args),
        Command::Regimes(args) => commands::regimes::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
