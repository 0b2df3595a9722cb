//! Experiment configuration: TOML schema, CLI flag overrides, seed
//! resolution, and emission of the fully resolved config into every output
//! directory so any run can be reproduced from its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use gcausal_core::engine::DiscoveryConfig;
use gcausal_core::rng::mix_seed;
use gcausal_core::scm::{sample_spec, simulate, ScmSpec};
use gcausal_core::stats::TestKind;
use gcausal_core::{GroupCausalGraph, GroupPartition, TimeSeriesPanel};

use crate::error::{CliError, Result};
use crate::io::{self, MissingPolicy};

/// Stream tags for CLI-level seed derivation (ASCII mnemonics). Core tags
/// live in gcausal_core::engine; these must not collide with them.
pub const SPEC_TAG: u64 = 0x7370_6563; // "spec"
pub const SIM_TAG: u64 = 0x7369_6d75; // "simu"
pub const BENCH_TAG: u64 = 0x626e_6368; // "bnch"
pub const KDIAG_TAG: u64 = 0x6b64_6961; // "kdia"
pub const KSWEEP_TAG: u64 = 0x6b73_7770; // "kswp"

/// Discovery method selector.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize, clap::ValueEnum,
)]
pub enum Method {
    /// Knockoff-intervention invariance discovery.
    #[default]
    #[serde(rename = "gcdmi")]
    #[value(name = "gcdmi")]
    Gcdmi,
    /// Granger F-tests between per-group canonical variables.
    #[serde(rename = "mc-vgc")]
    #[value(name = "mc-vgc")]
    McVgc,
    /// Knockoff-intervention discovery on per-group canonical variables.
    #[serde(rename = "mc-cdmi")]
    #[value(name = "mc-cdmi")]
    McCdmi,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gcdmi => "gcdmi",
            Method::McVgc => "mc-vgc",
            Method::McCdmi => "mc-cdmi",
        }
    }
}

/// Sweep axis for the benchmark subcommand.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Fraction of realized cross-group edges.
    Density,
    /// Fraction of edges carrying nonlinear forms.
    Nonlinearity,
    /// Number of groups (values must be integers >= 2).
    Groups,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Density => "density",
            SweepAxis::Nonlinearity => "nonlinearity",
            SweepAxis::Groups => "groups",
        }
    }
}

/// Inline synthetic dataset: a sampled lagged structural model.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScmDataset {
    pub groups: usize,
    pub vars_per_group: usize,
    pub density: f64,
    pub nonlinearity: f64,
    pub max_lag: usize,
    pub noise_std: f64,
    pub length: usize,
    pub burn_in: usize,
}

impl Default for ScmDataset {
    fn default() -> Self {
        ScmDataset {
            groups: 4,
            vars_per_group: 2,
            density: 0.5,
            nonlinearity: 0.0,
            max_lag: 2,
            noise_std: 1.0,
            length: 2000,
            burn_in: 200,
        }
    }
}

impl ScmDataset {
    /// Contiguous uniform partition: group g owns variables
    /// [g·m, (g+1)·m).
    pub fn partition(&self) -> Result<GroupPartition> {
        let m = self.vars_per_group;
        let blocks: Vec<Vec<usize>> = (0..self.groups)
            .map(|g| (g * m..(g + 1) * m).collect())
            .collect();
        Ok(GroupPartition::new(blocks, self.groups * m)?)
    }
}

/// External dataset: a panel CSV plus an optional groups JSON. Without a
/// groups file every variable forms its own group.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanelDataset {
    pub csv: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<PathBuf>,
    pub missing: MissingPolicy,
}

/// Exactly one of the two sources must be present.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scm: Option<ScmDataset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panel: Option<PanelDataset>,
}

/// Parameters of the Granger baseline.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub lag_order: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { lag_order: 5 }
    }
}

/// Covariance regime segmentation settings; when enabled the discover
/// subcommand segments first and discovers per segment.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeConfig {
    pub enabled: bool,
    pub window_length: usize,
    pub stride: usize,
    pub k: usize,
    pub smoothing_width: usize,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        RegimeConfig {
            enabled: false,
            window_length: 100,
            stride: 50,
            k: 2,
            smoothing_width: 5,
        }
    }
}

/// Knockoff diagnostics settings (knockoff-diag subcommand).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnockoffConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub rho: f64,
}

impl Default for KnockoffConfig {
    fn default() -> Self {
        KnockoffConfig {
            dims: vec![5, 10, 20, 40],
            trials: 10,
            rho: 0.5,
        }
    }
}

/// Two-sample test study settings (test-bench subcommand).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestBenchConfig {
    pub n: usize,
    pub repetitions: usize,
}

impl Default for TestBenchConfig {
    fn default() -> Self {
        TestBenchConfig {
            n: 100,
            repetitions: 200,
        }
    }
}

fn numeric_list<'de, D>(d: D) -> core::result::Result<Vec<f64>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    use serde::Deserialize as _;
    // TOML types `[2, 4]` as integers; accept both integer and float lists.
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Num {
        I(i64),
        F(f64),
    }
    let nums = Vec::<Num>::deserialize(d)?;
    Ok(nums
        .into_iter()
        .map(|n| match n {
            Num::I(i) => i as f64,
            Num::F(f) => f,
        })
        .collect())
}

/// Benchmark sweep: one axis, a value list, trials per value, and the
/// methods to score.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    #[serde(deserialize_with = "numeric_list")]
    pub values: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            axis: SweepAxis::Density,
            values: vec![0.3, 0.6, 0.9],
            trials: 5,
            methods: vec![Method::Gcdmi],
        }
    }
}

/// Root experiment configuration. The output directory is deliberately not
/// part of this struct: rerunning an emitted config into a fresh directory
/// must reproduce artifacts byte for byte.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetConfig>,
    pub discovery: DiscoveryConfig,
    pub baseline: BaselineConfig,
    pub regimes: RegimeConfig,
    pub knockoff: KnockoffConfig,
    pub test_bench: TestBenchConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(ds) = &self.dataset {
            match (&ds.scm, &ds.panel) {
                (Some(_), Some(_)) => {
                    return Err(CliError::config(
                        "dataset declares both scm and panel sources; keep exactly one",
                    ));
                }
                (None, None) => {
                    return Err(CliError::config(
                        "dataset section is empty; declare [dataset.scm] or [dataset.panel]",
                    ));
                }
                (Some(scm), None) => {
                    if scm.groups == 0 || scm.vars_per_group == 0 {
                        return Err(CliError::config(
                            "dataset.scm needs groups >= 1 and vars_per_group >= 1",
                        ));
                    }
                }
                (None, Some(panel)) => {
                    if panel.csv.as_os_str().is_empty() {
                        return Err(CliError::config("dataset.panel.csv path is empty"));
                    }
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::config("sweep.values must be non-empty"));
            }
            if sweep.trials == 0 {
                return Err(CliError::config("sweep.trials must be >= 1"));
            }
            if sweep.methods.is_empty() {
                return Err(CliError::config("sweep.methods must be non-empty"));
            }
            for &v in &sweep.values {
                let ok = match sweep.axis {
                    SweepAxis::Density | SweepAxis::Nonlinearity => (0.0..=1.0).contains(&v),
                    SweepAxis::Groups => v >= 2.0 && v.fract() == 0.0,
                };
                if !ok {
                    return Err(CliError::config(format!(
                        "sweep value {v} is invalid for axis {}",
                        sweep.axis.name()
                    )));
                }
            }
        }
        self.discovery.validate()?;
        Ok(())
    }

}

/// Flags shared by every subcommand.
#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// TOML experiment config; explicit flags override its keys
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory, created if absent (not part of the config)
    #[arg(long, value_name = "DIR", default_value = "gcausal_out")]
    pub out: PathBuf,
    /// Master seed; overrides the config seed and GCAUSAL_SEED
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Dataset override flags for subcommands that consume a panel.
#[derive(Debug, clap::Args)]
pub struct PanelArgs {
    /// Panel CSV path; overrides the configured dataset source
    #[arg(long, value_name = "CSV")]
    pub panel: Option<PathBuf>,
    /// Groups JSON path ({"groups": [[idx, ...], ...], "names": [...]})
    #[arg(long, value_name = "JSON")]
    pub groups: Option<PathBuf>,
    /// Missing-cell policy for panel ingestion
    #[arg(long, value_enum)]
    pub missing: Option<MissingPolicy>,
}

impl PanelArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if self.panel.is_none() && self.groups.is_none() && self.missing.is_none() {
            return;
        }
        let ds = cfg.dataset.get_or_insert_with(DatasetConfig::default);
        if self.panel.is_some() {
            // An explicit panel flag overrides any configured scm source.
            ds.scm = None;
        }
        let p = ds.panel.get_or_insert_with(PanelDataset::default);
        if let Some(csv) = &self.panel {
            p.csv = csv.clone();
        }
        if let Some(g) = &self.groups {
            p.groups = Some(g.clone());
        }
        if let Some(m) = self.missing {
            p.missing = m;
        }
    }
}

/// Load the config file if given, else start from defaults.
pub fn load(common: &CommonArgs) -> Result<ExperimentConfig> {
    match &common.config {
        None => Ok(ExperimentConfig::default()),
        Some(path) => {
            let text = io::read_referenced_file(path)?;
            toml::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
        }
    }
}

/// Resolve the master seed (flag > config > GCAUSAL_SEED > 0), stamp it
/// into the config, and validate. Returns the resolved seed.
pub fn finalize(cfg: &mut ExperimentConfig, seed_flag: Option<u64>) -> Result<u64> {
    // The environment is only consulted (and only then validated) when
    // neither the flag nor the config supplies a seed.
    let seed = match seed_flag.or(cfg.seed) {
        Some(seed) => seed,
        None => match std::env::var("GCAUSAL_SEED") {
            Err(_) => 0,
            Ok(text) => text.parse::<u64>().map_err(|_| {
                CliError::config(format!(
                    "GCAUSAL_SEED must be an unsigned integer, got '{text}'"
                ))
            })?,
        },
    };
    cfg.seed = Some(seed);
    cfg.discovery.seed = seed;
    cfg.validate()?;
    Ok(seed)
}

/// Create the output directory, write the resolved config.toml into it, and
/// return the compact JSON form used for embedding in result artifacts.
pub fn emit(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", out.display())))?;
    let text = toml::to_string(cfg)
        .map_err(|e| CliError::data(format!("cannot serialize config: {e}")))?;
    io::write_text(&out.join("config.toml"), &text)?;
    serde_json::to_string(cfg).map_err(|e| CliError::data(format!("cannot serialize config: {e}")))
}

/// A loaded dataset ready for discovery: the panel, its group partition,
/// and, for synthetic sources, the generating spec and true graph.
pub struct ResolvedDataset {
    pub panel: TimeSeriesPanel,
    pub partition: GroupPartition,
    pub group_names: Option<Vec<String>>,
    pub truth: Option<GroupCausalGraph>,
    pub spec: Option<ScmSpec>,
}

/// Materialize the configured dataset. Synthetic sources derive their spec
/// and simulation seeds from the master seed, so equal configs give equal
/// panels.
pub fn resolve_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<ResolvedDataset> {
    let ds = cfg.dataset.as_ref().ok_or_else(|| {
        CliError::config(
            "no dataset configured; add [dataset.scm] or [dataset.panel], or pass --panel",
        )
    })?;
    if let Some(scm) = &ds.scm {
        let partition = scm.partition()?;
        let spec = sample_spec(
            &partition,
            scm.density,
            scm.nonlinearity,
            scm.max_lag,
            scm.noise_std,
            mix_seed(seed, &[SPEC_TAG]),
        )?;
        let (panel, truth) = simulate(&spec, scm.length, scm.burn_in, mix_seed(seed, &[SIM_TAG]))?;
        return Ok(ResolvedDataset {
            panel,
            partition,
            group_names: None,
            truth: Some(truth),
            spec: Some(spec),
        });
    }
    let panel_cfg = ds.panel.as_ref().expect("validated: exactly one source");
    let panel = io::load_panel(&panel_cfg.csv, panel_cfg.missing)?;
    let (partition, group_names) = match &panel_cfg.groups {
        Some(path) => io::load_groups(path, panel.num_vars())?,
        None => (GroupPartition::singletons(panel.num_vars()), None),
    };
    Ok(ResolvedDataset {
        panel,
        partition,
        group_names,
        truth: None,
        spec: None,
    })
}

/// Clap value parser for two-sample test names (serde spelling).
pub fn parse_test_kind(s: &str) -> core::result::Result<TestKind, String> {
    match s {
        "ks" => Ok(TestKind::Ks),
        "mwu" => Ok(TestKind::Mwu),
        "cvm" => Ok(TestKind::Cvm),
        "wsr" => Ok(TestKind::Wsr),
        "welch" => Ok(TestKind::Welch),
        "ad" => Ok(TestKind::Ad),
        other => Err(format!(
            "unknown test '{other}'; expected ks, mwu, cvm, wsr, welch, or ad"
        )),
    }
}

/// Test names as they appear in configs and result tables.
pub fn test_name(kind: TestKind) -> &'static str {
    match kind {
        TestKind::Ks => "ks",
        TestKind::Mwu => "mwu",
        TestKind::Cvm => "cvm",
        TestKind::Wsr => "wsr",
        TestKind::Welch => "welch",
        TestKind::Ad => "ad",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_preserves_config() {
        let mut cfg = ExperimentConfig {
            seed: Some(7),
            dataset: Some(DatasetConfig {
                scm: Some(ScmDataset::default()),
                panel: None,
            }),
            sweep: Some(SweepConfig::default()),
            ..ExperimentConfig::default()
        };
        cfg.discovery.stride = Some(2);
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn sweep_values_accept_integers() {
        let cfg: ExperimentConfig = toml::from_str(
            "[sweep]\naxis = \"groups\"\nvalues = [2, 4]\ntrials = 1\nmethods = [\"gcdmi\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.sweep.unwrap().values, vec![2.0, 4.0]);
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let err = toml::from_str::<ExperimentConfig>("sede = 3\n").unwrap_err();
        assert!(err.to_string().contains("sede"));
    }

    #[test]
    fn validate_rejects_two_dataset_sources() {
        let cfg = ExperimentConfig {
            dataset: Some(DatasetConfig {
                scm: Some(ScmDataset::default()),
                panel: Some(PanelDataset::default()),
            }),
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn validate_rejects_fractional_group_counts() {
        let cfg = ExperimentConfig {
            sweep: Some(SweepConfig {
                axis: SweepAxis::Groups,
                values: vec![2.5],
                ..SweepConfig::default()
            }),
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seed_resolution_prefers_flag_then_config() {
        let mut cfg = ExperimentConfig {
            seed: Some(9),
            ..ExperimentConfig::default()
        };
        assert_eq!(finalize(&mut cfg, Some(4)).unwrap(), 4);
        assert_eq!(cfg.seed, Some(4));
        assert_eq!(cfg.discovery.seed, 4);
        let mut cfg = ExperimentConfig {
            seed: Some(9),
            ..ExperimentConfig::default()
        };
        assert_eq!(finalize(&mut cfg, None).unwrap(), 9);
    }

    #[test]
    fn method_names_roundtrip_through_serde() {
        for m in [Method::Gcdmi, Method::McVgc, Method::McCdmi] {
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
            let back: Method = serde_json::from_str(&json).unwrap();
            assert_eq!(back, m);
        }
    }
}
