//! regimes: covariance regime segmentation of a panel.

use gcausal_core::regimes::identify_regimes;
use serde_json::json;

use crate::config::{self, CommonArgs, ExperimentConfig, PanelArgs};
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub panel: PanelArgs,
    /// Sliding window length (>= num_vars + 1)
    #[arg(long)]
    pub window_length: Option<usize>,
    /// Offset between consecutive windows
    #[arg(long)]
    pub stride: Option<usize>,
    /// Number of regimes (>= 2)
    #[arg(long)]
    pub k: Option<usize>,
    /// Odd median-filter width for label smoothing
    #[arg(long)]
    pub smoothing_width: Option<usize>,
}

impl Args {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        self.panel.apply(cfg);
        cfg.regimes.enabled = true;
        if let Some(v) = self.window_length {
            cfg.regimes.window_length = v;
        }
        if let Some(v) = self.stride {
            cfg.regimes.stride = v;
        }
        if let Some(v) = self.k {
            cfg.regimes.k = v;
        }
        if let Some(v) = self.smoothing_width {
            cfg.regimes.smoothing_width = v;
        }
    }
}

pub fn run(args: &Args) -> Result<()> {
    let mut cfg = config::load(&args.common)?;
    args.apply(&mut cfg);
    let seed = config::finalize(&mut cfg, args.common.seed)?;
    let cfg_json = config::emit(&cfg, &args.common.out)?;
    let cfg_value: serde_json::Value = serde_json::from_str(&cfg_json)
        .map_err(|e| CliError::data(format!("config JSON: {e}")))?;
    let data = config::resolve_dataset(&cfg, seed)?;

    let r = &cfg.regimes;
    let labels = identify_regimes(
        &data.panel.values,
        r.window_length,
        r.stride,
        r.k,
        r.smoothing_width,
        seed,
    )?;
    io::write_json(
        &args.common.out.join("segments.json"),
        &json!({ "config": cfg_value, "labels": labels }),
    )?;
    let rows: Vec<Vec<String>> = labels
        .labels
        .iter()
        .enumerate()
        .map(|(w, &label)| {
            vec![w.to_string(), (w * labels.stride).to_string(), label.to_string()]
        })
        .collect();
    io::write_result_csv(
        &args.common.out.join("labels.csv"),
        &cfg_json,
        &["window", "start", "label"],
        &rows,
    )?;
    println!(
        "regimes: {} windows into {} segments, silhouette {:.3} -> {}",
        labels.labels.len(),
        labels.segments.len(),
        labels.silhouette,
        args.common.out.display()
    );
    Ok(())
}
