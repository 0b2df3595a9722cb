//! benchmark: sweep one simulator axis, score each method against the
//! sampled truth, and emit per-trial and aggregate tables plus plot data.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use gcausal_core::data::{score_graph, GraphScore};
use gcausal_core::rng::mix_seed;
use gcausal_core::scm::{sample_spec, simulate};

use crate::config::{
    self, CommonArgs, ExperimentConfig, Method, ScmDataset, SweepAxis, SweepConfig, BENCH_TAG,
};
use crate::error::{CliError, Result};
use crate::io::{self, fmt_f64};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sweep axis
    #[arg(long, value_enum)]
    pub axis: Option<SweepAxis>,
    /// Sweep values, comma separated
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Trials per sweep value
    #[arg(long)]
    pub trials: Option<usize>,
    /// Methods to score, comma separated
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
}

struct Job {
    method: Method,
    method_index: usize,
    value: f64,
    value_index: usize,
    trial: usize,
}

/// Per-trial results keep CLI errors as strings: a failed trial is a row in
/// the table, not a process failure.
type TrialScore = core::result::Result<GraphScore, String>;

fn run_trial(job: &Job, base: &ScmDataset, cfg: &ExperimentConfig, master: u64) -> TrialScore {
    let mut scm = base.clone();
    match cfg.sweep.as_ref().expect("validated").axis {
        SweepAxis::Density => scm.density = job.value,
        SweepAxis::Nonlinearity => scm.nonlinearity = job.value,
        SweepAxis::Groups => scm.groups = job.value as usize,
    }
    let run = || -> Result<GraphScore> {
        // Data seeds omit the method index, so every method sees the same
        // panel at a given (value, trial): a paired comparison.
        let trial_base = mix_seed(master, &[BENCH_TAG, job.value_index as u64, job.trial as u64]);
        let partition = scm.partition()?;
        let spec = sample_spec(
            &partition,
            scm.density,
            scm.nonlinearity,
            scm.max_lag,
            scm.noise_std,
            mix_seed(trial_base, &[1]),
        )?;
        let (panel, truth) = simulate(&spec, scm.length, scm.burn_in, mix_seed(trial_base, &[2]))?;
        let method_seed = mix_seed(trial_base, &[3 + job.method_index as u64]);
        let graph = super::run_method(job.method, &panel, &partition, cfg, method_seed)?;
        Ok(score_graph(&graph, &truth)?)
    };
    run().map_err(|e| e.to_string())
}

pub fn run(args: &Args) -> Result<()> {
    let mut cfg = config::load(&args.common)?;
    if args.axis.is_some() || args.values.is_some() || args.trials.is_some()
        || args.methods.is_some()
    {
        let sweep = cfg.sweep.get_or_insert_with(SweepConfig::default);
        if let Some(v) = args.axis {
            sweep.axis = v;
        }
        if let Some(v) = &args.values {
            sweep.values = v.clone();
        }
        if let Some(v) = args.trials {
            sweep.trials = v;
        }
        if let Some(v) = &args.methods {
            sweep.methods = v.clone();
        }
    }
    if cfg.sweep.is_none() {
        return Err(CliError::config(
            "benchmark needs a [sweep] section or the --axis/--values/--trials/--methods flags",
        ));
    }
    let master = config::finalize(&mut cfg, args.common.seed)?;
    let cfg_json = config::emit(&cfg, &args.common.out)?;
    let sweep = cfg.sweep.clone().expect("checked above");
    let base = cfg
        .dataset
        .as_ref()
        .and_then(|d| d.scm.clone())
        .unwrap_or_default();

    let mut jobs = Vec::new();
    for (mi, &method) in sweep.methods.iter().enumerate() {
        for (vi, &value) in sweep.values.iter().enumerate() {
            for trial in 0..sweep.trials {
                jobs.push(Job {
                    method,
                    method_index: mi,
                    value,
                    value_index: vi,
                    trial,
                });
            }
        }
    }

    // Worker pool: trials are independent; the table order below depends
    // only on the job index, never on completion order.
    let results: Vec<Mutex<Option<TrialScore>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(std::num::NonZeroUsize::get)
        .unwrap_or(1)
        .min(jobs.len())
        .max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= jobs.len() {
                    break;
                }
                let outcome = run_trial(&jobs[idx], &base, &cfg, master);
                *results[idx].lock().expect("result slot") = Some(outcome);
            });
        }
    });
    let results: Vec<TrialScore> = results
        .into_iter()
        .map(|m| m.into_inner().expect("no poisoned slots").expect("all jobs ran"))
        .collect();

    // Per-trial rows plus one aggregate row (trial = "mean") per value.
    let header = [
        "method", "value", "trial", "seed", "status", "precision", "recall", "f_score",
    ];
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut failed = 0usize;
    let mut mean_f: Vec<Vec<Option<f64>>> = vec![vec![None; sweep.values.len()]; sweep.methods.len()];
    let mut job_idx = 0;
    for (mi, &method) in sweep.methods.iter().enumerate() {
        for (vi, &value) in sweep.values.iter().enumerate() {
            let mut ok_scores: Vec<GraphScore> = Vec::new();
            for trial in 0..sweep.trials {
                let trial_base =
                    mix_seed(master, &[BENCH_TAG, vi as u64, trial as u64]);
                let row = match &results[job_idx] {
                    Ok(score) => {
                        ok_scores.push(*score);
                        vec![
                            method.name().to_string(),
                            fmt_f64(value),
                            trial.to_string(),
                            trial_base.to_string(),
                            "ok".to_string(),
                            fmt_f64(score.precision),
                            fmt_f64(score.recall),
                            fmt_f64(score.f_score),
                        ]
                    }
                    Err(msg) => {
                        failed += 1;
                        eprintln!(
                            "benchmark: {} {}={} trial {trial} failed: {msg}",
                            method.name(),
                            sweep.axis.name(),
                            fmt_f64(value)
                        );
                        vec![
                            method.name().to_string(),
                            fmt_f64(value),
                            trial.to_string(),
                            trial_base.to_string(),
                            "failed".to_string(),
                            String::new(),
                            String::new(),
                            String::new(),
                        ]
                    }
                };
                rows.push(row);
                job_idx += 1;
            }
            let n = ok_scores.len();
            let agg = if n > 0 {
                let mean = |f: fn(&GraphScore) -> f64| {
                    ok_scores.iter().map(f).sum::<f64>() / n as f64
                };
                let (p, r, f) = (
                    mean(|s| s.precision),
                    mean(|s| s.recall),
                    mean(|s| s.f_score),
                );
                mean_f[mi][vi] = Some(f);
                vec![
                    method.name().to_string(),
                    fmt_f64(value),
                    "mean".to_string(),
                    String::new(),
                    "ok".to_string(),
                    fmt_f64(p),
                    fmt_f64(r),
                    fmt_f64(f),
                ]
            } else {
                vec![
                    method.name().to_string(),
                    fmt_f64(value),
                    "mean".to_string(),
                    String::new(),
                    "failed".to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]
            };
            rows.push(agg);
            println!(
                "benchmark: {} {}={} mean F {} ({n}/{} ok)",
                method.name(),
                sweep.axis.name(),
                fmt_f64(value),
                mean_f[mi][vi].map_or_else(|| "n/a".to_string(), fmt_f64),
                sweep.trials
            );
        }
    }
    io::write_result_csv(&args.common.out.join("results.csv"), &cfg_json, &header, &rows)?;

    // Plot data: one row per sweep value, one mean-F series per method.
    let mut plot_header: Vec<&str> = vec!["value"];
    for &m in &sweep.methods {
        plot_header.push(m.name());
    }
    let plot_rows: Vec<Vec<String>> = sweep
        .values
        .iter()
        .enumerate()
        .map(|(vi, &value)| {
            let mut row = vec![fmt_f64(value)];
            for series in &mean_f {
                row.push(series[vi].map_or_else(String::new, fmt_f64));
            }
            row
        })
        .collect();
    io::write_result_csv(
        &args.common.out.join("plot.csv"),
        &cfg_json,
        &plot_header,
        &plot_rows,
    )?;

    let total = jobs.len();
    println!(
        "benchmark: {total} trials, {failed} failed -> {}",
        args.common.out.display()
    );
    if failed * 2 > total {
        return Err(CliError::Numeric(format!(
            "{failed} of {total} benchmark trials failed"
        )));
    }
    Ok(())
}
