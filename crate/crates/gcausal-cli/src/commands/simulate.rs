//! simulate: sample a synthetic benchmark system and write the dataset.

use serde_json::json;

use crate::config::{self, CommonArgs, DatasetConfig, ScmDataset};
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of variable groups
    #[arg(long)]
    pub groups: Option<usize>,
    /// Variables per group
    #[arg(long)]
    pub vars_per_group: Option<usize>,
    /// Fraction of realized cross-group edges, in [0, 1]
    #[arg(long)]
    pub density: Option<f64>,
    /// Fraction of edges carrying nonlinear forms, in [0, 1]
    #[arg(long)]
    pub nonlinearity: Option<f64>,
    /// Maximum causal lag
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Noise standard deviation
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Panel length after burn-in
    #[arg(long)]
    pub length: Option<usize>,
    /// Discarded warm-up steps
    #[arg(long)]
    pub burn_in: Option<usize>,
}

impl Args {
    fn apply(&self, scm: &mut ScmDataset) {
        if let Some(v) = self.groups {
            scm.groups = v;
        }
        if let Some(v) = self.vars_per_group {
            scm.vars_per_group = v;
        }
        if let Some(v) = self.density {
            scm.density = v;
        }
        if let Some(v) = self.nonlinearity {
            scm.nonlinearity = v;
        }
        if let Some(v) = self.max_lag {
            scm.max_lag = v;
        }
        if let Some(v) = self.noise_std {
            scm.noise_std = v;
        }
        if let Some(v) = self.length {
            scm.length = v;
        }
        if let Some(v) = self.burn_in {
            scm.burn_in = v;
        }
    }
}

pub fn run(args: &Args) -> Result<()> {
    let mut cfg = config::load(&args.common)?;
    let ds = cfg.dataset.get_or_insert_with(DatasetConfig::default);
    if ds.panel.is_some() && ds.scm.is_none() {
        return Err(CliError::config(
            "simulate generates synthetic data; configure [dataset.scm], not [dataset.panel]",
        ));
    }
    args.apply(ds.scm.get_or_insert_with(ScmDataset::default));
    let seed = config::finalize(&mut cfg, args.common.seed)?;
    let cfg_json = config::emit(&cfg, &args.common.out)?;

    let data = config::resolve_dataset(&cfg, seed)?;
    let truth = data.truth.as_ref().expect("scm datasets carry a truth graph");
    let spec = data.spec.as_ref().expect("scm datasets carry their spec");

    io::write_panel(&args.common.out.join("panel.csv"), &data.panel)?;
    io::write_groups(&args.common.out.join("groups.json"), &data.partition, None)?;
    io::write_graph(&args.common.out.join("truth_graph.json"), truth)?;
    let cfg_value: serde_json::Value = serde_json::from_str(&cfg_json)
        .map_err(|e| CliError::data(format!("config JSON: {e}")))?;
    io::write_json(
        &args.common.out.join("scm_spec.json"),
        &json!({ "config": cfg_value, "spec": spec }),
    )?;

    println!(
        "simulate: seed {seed}, {} vars x {} steps, {} groups, {} cross-group edges -> {}",
        data.panel.num_vars(),
        data.panel.len(),
        data.partition.num_groups(),
        truth.num_edges(),
        args.common.out.display()
    );
    Ok(())
}
