//! discover: knockoff-intervention discovery, optionally per covariance
//! regime.

use gcausal_core::data::score_graph;
use gcausal_core::engine::{discover, discover_regimes};
use gcausal_core::regimes::identify_regimes;
use gcausal_core::stats::TestKind;
use serde_json::json;

use crate::config::{self, parse_test_kind, CommonArgs, ExperimentConfig, Method, PanelArgs};
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub panel: PanelArgs,
    /// Significance level for the residual tests
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Two-sample test: ks, mwu, cvm, wsr, welch, or ad
    #[arg(long, value_parser = parse_test_kind)]
    pub test: Option<TestKind>,
    /// Divide alpha by the target group size before aggregation
    #[arg(long, value_name = "BOOL")]
    pub bonferroni: Option<bool>,
    /// Residual window stride (defaults to the forecast horizon)
    #[arg(long)]
    pub stride: Option<usize>,
    /// Off-diagonal covariance shrinkage for knockoff moments, in [0, 1)
    #[arg(long)]
    pub shrinkage: Option<f64>,
    /// Forecaster training epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Forecaster hidden width
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Forecast window length
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Autoregressive context length
    #[arg(long)]
    pub context_len: Option<usize>,
    /// Segment into covariance regimes and discover per segment
    #[arg(long, value_name = "BOOL")]
    pub regimes: Option<bool>,
    /// Regime window length
    #[arg(long)]
    pub regime_window: Option<usize>,
    /// Regime window stride
    #[arg(long)]
    pub regime_stride: Option<usize>,
    /// Number of regimes
    #[arg(long)]
    pub regime_k: Option<usize>,
    /// Odd median-filter width for regime label smoothing
    #[arg(long)]
    pub regime_smoothing: Option<usize>,
}

impl Args {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        self.panel.apply(cfg);
        if let Some(v) = self.alpha {
            cfg.discovery.alpha = v;
        }
        if let Some(v) = self.test {
            cfg.discovery.test = v;
        }
        if let Some(v) = self.bonferroni {
            cfg.discovery.bonferroni = v;
        }
        if let Some(v) = self.stride {
            cfg.discovery.stride = Some(v);
        }
        if let Some(v) = self.shrinkage {
            cfg.discovery.shrinkage = v;
        }
        if let Some(v) = self.epochs {
            cfg.discovery.forecaster.epochs = v;
        }
        if let Some(v) = self.hidden {
            cfg.discovery.forecaster.hidden = v;
        }
        if let Some(v) = self.horizon {
            cfg.discovery.forecaster.horizon = v;
        }
        if let Some(v) = self.context_len {
            cfg.discovery.forecaster.context_len = v;
        }
        if let Some(v) = self.regimes {
            cfg.regimes.enabled = v;
        }
        if let Some(v) = self.regime_window {
            cfg.regimes.window_length = v;
        }
        if let Some(v) = self.regime_stride {
            cfg.regimes.stride = v;
        }
        if let Some(v) = self.regime_k {
            cfg.regimes.k = v;
        }
        if let Some(v) = self.regime_smoothing {
            cfg.regimes.smoothing_width = v;
        }
    }
}

pub fn run(args: &Args) -> Result<()> {
    let mut cfg = config::load(&args.common)?;
    args.apply(&mut cfg);
    if cfg.method != Method::Gcdmi {
        return Err(CliError::config(format!(
            "discover runs gcdmi; use the baseline subcommand for {}",
            cfg.method.name()
        )));
    }
    let seed = config::finalize(&mut cfg, args.common.seed)?;
    let cfg_json = config::emit(&cfg, &args.common.out)?;
    let cfg_value: serde_json::Value = serde_json::from_str(&cfg_json)
        .map_err(|e| CliError::data(format!("config JSON: {e}")))?;
    let data = config::resolve_dataset(&cfg, seed)?;

    if cfg.regimes.enabled {
        return run_regimes(args, &cfg, &cfg_value, &data);
    }

    let result = discover(&data.panel, &data.partition, &cfg.discovery)?;
    io::write_graph(&args.common.out.join("graph.json"), &result.graph)?;
    io::write_json(
        &args.common.out.join("evidence.json"),
        &json!({ "config": cfg_value, "result": result }),
    )?;
    let mut rows = Vec::new();
    let g = result.graph.groups;
    for i in 0..g {
        for j in 0..g {
            if i != j {
                let edge = u8::from(result.graph.has_edge(i, j));
                rows.push(vec![i.to_string(), j.to_string(), edge.to_string()]);
            }
        }
    }
    io::write_result_csv(
        &args.common.out.join("adjacency.csv"),
        &cfg_json,
        &["source", "target", "edge"],
        &rows,
    )?;
    println!(
        "discover: seed {seed}, {} groups, {} directed edges -> {}",
        g,
        result.graph.num_edges(),
        args.common.out.display()
    );
    let group_name = |idx: usize| -> String {
        match &data.group_names {
            Some(names) => names[idx].clone(),
            None => format!("group {idx}"),
        }
    };
    for i in 0..g {
        for j in 0..g {
            if result.graph.has_edge(i, j) {
                println!("discover: {} -> {}", group_name(i), group_name(j));
            }
        }
    }
    if let Some(truth) = &data.truth {
        let score = score_graph(&result.graph, truth)?;
        io::write_json(
            &args.common.out.join("score.json"),
            &json!({ "config": cfg_value, "score": score }),
        )?;
        println!(
            "discover: vs truth precision {:.3}, recall {:.3}, F {:.3}",
            score.precision, score.recall, score.f_score
        );
    }
    Ok(())
}

fn run_regimes(
    args: &Args,
    cfg: &ExperimentConfig,
    cfg_value: &serde_json::Value,
    data: &config::ResolvedDataset,
) -> Result<()> {
    let r = &cfg.regimes;
    let labels = identify_regimes(
        &data.panel.values,
        r.window_length,
        r.stride,
        r.k,
        r.smoothing_width,
        cfg.discovery.seed,
    )?;
    let result = discover_regimes(&data.panel, &data.partition, &labels, &cfg.discovery)?;
    io::write_json(
        &args.common.out.join("regimes.json"),
        &json!({ "config": cfg_value, "labels": labels, "result": result }),
    )?;
    for (idx, seg) in result.segments.iter().enumerate() {
        if let Some(res) = &seg.result {
            let name = format!("regime_{idx:02}_graph.json");
            io::write_graph(&args.common.out.join(name), &res.graph)?;
        }
    }
    let rows: Vec<Vec<String>> = result
        .occurrence
        .iter()
        .map(|o| {
            vec![
                o.group_a.to_string(),
                o.group_b.to_string(),
                io::fmt_f64(o.forward),
                io::fmt_f64(o.backward),
                io::fmt_f64(o.bidirectional),
                io::fmt_f64(o.none),
            ]
        })
        .collect();
    let cfg_json = serde_json::to_string(cfg)
        .map_err(|e| CliError::data(format!("config JSON: {e}")))?;
    io::write_result_csv(
        &args.common.out.join("occurrence.csv"),
        &cfg_json,
        &[
            "group_a",
            "group_b",
            "forward",
            "backward",
            "bidirectional",
            "none",
        ],
        &rows,
    )?;
    println!(
        "discover: {} segments ({} analyzed), silhouette {:.3} -> {}",
        result.segments.len(),
        result.analyzed,
        labels.silhouette,
        args.common.out.display()
    );
    Ok(())
}
