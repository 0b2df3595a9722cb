//! One module per subcommand plus shared method dispatch.

pub mod baseline;
pub mod benchmark;
pub mod discover;
pub mod knockoff_diag;
pub mod regimes;
pub mod simulate;
pub mod test_bench;

use gcausal_core::cca::{mc_cdmi_discover, mc_vgc_discover};
use gcausal_core::engine::{discover, DiscoveryConfig};
use gcausal_core::{GroupCausalGraph, GroupPartition, TimeSeriesPanel};

use crate::config::{ExperimentConfig, Method};
use crate::error::Result;

/// Run one discovery method and return its directed group graph. `seed`
/// replaces the discovery seed, so benchmark trials stay independent.
pub fn run_method(
    method: Method,
    panel: &TimeSeriesPanel,
    partition: &GroupPartition,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<GroupCausalGraph> {
    let discovery = DiscoveryConfig {
        seed,
        ..cfg.discovery.clone()
    };
    let graph = match method {
        Method::Gcdmi => discover(panel, partition, &discovery)?.graph,
        Method::McVgc => mc_vgc_discover(
            panel,
            partition,
            cfg.baseline.lag_order,
            cfg.discovery.alpha,
        )?,
        Method::McCdmi => mc_cdmi_discover(panel, partition, &discovery)?,
    };
    Ok(graph)
}
