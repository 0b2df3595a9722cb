//! test-bench: detection-rate study of the two-sample test battery.

use gcausal_core::stats::sensitivity_study;

use crate::config::{self, test_name, CommonArgs};
use crate::error::Result;
use crate::io::{self, fmt_f64};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sample size per side (>= 20)
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo repetitions (>= 100)
    #[arg(long)]
    pub repetitions: Option<usize>,
}

pub fn run(args: &Args) -> Result<()> {
    let mut cfg = config::load(&args.common)?;
    if let Some(v) = args.n {
        cfg.test_bench.n = v;
    }
    if let Some(v) = args.repetitions {
        cfg.test_bench.repetitions = v;
    }
    let seed = config::finalize(&mut cfg, args.common.seed)?;
    let cfg_json = config::emit(&cfg, &args.common.out)?;

    let rows = sensitivity_study(cfg.test_bench.n, cfg.test_bench.repetitions, seed)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                test_name(r.test).to_string(),
                r.perturbation.name().to_string(),
                r.n.to_string(),
                fmt_f64(r.power),
            ]
        })
        .collect();
    io::write_result_csv(
        &args.common.out.join("power.csv"),
        &cfg_json,
        &["test", "perturbation", "n", "power"],
        &table,
    )?;
    println!(
        "test-bench: {} rows at n {} over {} repetitions -> {}",
        rows.len(),
        cfg.test_bench.n,
        cfg.test_bench.repetitions,
        args.common.out.display()
    );
    Ok(())
}
