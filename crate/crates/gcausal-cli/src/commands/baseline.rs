//! baseline: canonical-correlation discovery methods (mc-vgc, mc-cdmi).

use gcausal_core::data::score_graph;
use serde_json::json;

use crate::config::{self, CommonArgs, Method, PanelArgs};
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub panel: PanelArgs,
    /// Baseline method
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// VAR lag order for mc-vgc
    #[arg(long)]
    pub lag_order: Option<usize>,
    /// Significance level
    #[arg(long)]
    pub alpha: Option<f64>,
}

pub fn run(args: &Args) -> Result<()> {
    let mut cfg = config::load(&args.common)?;
    args.panel.apply(&mut cfg);
    if let Some(m) = args.method {
        cfg.method = m;
    }
    if let Some(v) = args.lag_order {
        cfg.baseline.lag_order = v;
    }
    if let Some(v) = args.alpha {
        cfg.discovery.alpha = v;
    }
    if cfg.method == Method::Gcdmi {
        return Err(CliError::config(
            "baseline needs --method mc-vgc or mc-cdmi; the discover subcommand runs gcdmi",
        ));
    }
    let seed = config::finalize(&mut cfg, args.common.seed)?;
    let cfg_json = config::emit(&cfg, &args.common.out)?;
    let cfg_value: serde_json::Value = serde_json::from_str(&cfg_json)
        .map_err(|e| CliError::data(format!("config JSON: {e}")))?;
    let data = config::resolve_dataset(&cfg, seed)?;

    let graph = super::run_method(cfg.method, &data.panel, &data.partition, &cfg, seed)?;
    io::write_graph(&args.common.out.join("graph.json"), &graph)?;
    let mut result = json!({
        "config": cfg_value,
        "method": cfg.method.name(),
        "graph": graph,
    });
    println!(
        "baseline: {} found {} directed edges -> {}",
        cfg.method.name(),
        graph.num_edges(),
        args.common.out.display()
    );
    if let Some(truth) = &data.truth {
        let score = score_graph(&graph, truth)?;
        result["score"] = serde_json::to_value(score)
            .map_err(|e| CliError::data(format!("score JSON: {e}")))?;
        println!(
            "baseline: vs truth precision {:.3}, recall {:.3}, F {:.3}",
            score.precision, score.recall, score.f_score
        );
    }
    io::write_json(&args.common.out.join("result.json"), &result)?;
    Ok(())
}
