//! Group-level causal discovery by knockoff intervention.
//!
//! The pipeline trains one probabilistic forecaster on the standardized
//! panel, draws one knockoff copy of every variable, and then asks, for each
//! ordered group pair (i, j): does replacing group i's columns with their
//! knockoffs in the forecast contexts shift the residual distribution of any
//! variable in group j? A two-sample test per target variable with
//! existential aggregation (minimum p-value against alpha) decides the
//! directed edge i → j.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{
    make_windows, standardize, GroupCausalGraph, GroupPartition, TimeSeriesPanel, Window,
};
use crate::error::{CoreError, Result};
use crate::forecaster::{Forecaster, ForecasterConfig};
use crate::knockoffs::{equicorrelated_s, estimate_moments, sample_knockoffs, KnockoffPanel};
use crate::linalg::Matrix;
use crate::regimes::RegimeLabels;
use crate::rng::mix_seed;
use crate::stats::{decide, two_sample_test, TestKind, TestOutcome};

/// Seed tag for forecaster training.
const TRAIN_TAG: u64 = 0x74726169;
/// Seed tag for knockoff sampling.
const KNOCK_TAG: u64 = 0x6b6e6f6b;
/// Seed tag for per-variable tests (CVM and AD permutations).
const TEST_TAG: u64 = 0x74657374;
/// Seed tag for per-segment discovery in regime mode.
const REGIME_TAG: u64 = 0x7265676d;

/// Minimum residual windows a regime segment must support to be analyzed.
const MIN_SEGMENT_WINDOWS: usize = 10;

/// Settings for a discovery run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DiscoveryConfig {
    /// Significance level for the per-variable residual tests.
    pub alpha: f64,
    /// Two-sample test applied to baseline versus intervened residuals.
    pub test: TestKind,
    /// Forecaster hyperparameters; its seed is remixed with the run seed.
    pub forecaster: ForecasterConfig,
    /// Off-diagonal covariance shrinkage used for knockoff moments.
    pub shrinkage: f64,
    /// Residual window stride; defaults to the forecast horizon so window
    /// targets do not overlap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    /// Divide alpha by the target group size before aggregation.
    pub bonferroni: bool,
    /// Master seed; training, knockoffs, and tests derive from it.
    pub seed: u64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            alpha: 0.05,
            test: TestKind::Ks,
            forecaster: ForecasterConfig::default(),
            shrinkage: 0.1,
            stride: None,
            bonferroni: false,
            seed: 0,
        }
    }
}

impl DiscoveryConfig {
    /// Check every setting against its documented range.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CoreError::config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.stride == Some(0) {
            return Err(CoreError::config("stride must be positive"));
        }
        Ok(())
    }

    fn effective_stride(&self) -> usize {
        self.stride.unwrap_or(self.forecaster.horizon)
    }
}

/// Full record of one directed edge decision: the per-variable outcomes for
/// every variable of the target group, in group order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EdgeEvidence {
    pub source: usize,
    pub target: usize,
    /// Variable indices of the target group, aligned with `outcomes`.
    pub variables: Vec<usize>,
    pub outcomes: Vec<TestOutcome>,
    /// True iff some variable's p-value is below the (possibly corrected)
    /// level.
    pub decision: bool,
}

/// Graph plus the evidence behind every ordered-pair decision.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiscoveryResult {
    pub graph: GroupCausalGraph,
    pub evidence: Vec<EdgeEvidence>,
}

/// Residuals of every variable after replacing group `group_index` with its
/// knockoff columns in all forecast contexts. Targets stay observed, so a
/// shift relative to the baseline residuals is attributable to the removed
/// information.
pub fn intervene_group(
    model: &Forecaster,
    values: &Matrix,
    knockoffs: &KnockoffPanel,
    partition: &GroupPartition,
    group_index: usize,
    windows: &[Window],
) -> Result<Matrix> {
    if group_index >= partition.num_groups() {
        return Err(CoreError::data(format!(
            "group index {group_index} out of range for {} groups",
            partition.num_groups()
        )));
    }
    let vars = &partition.groups[group_index];
    model.residuals(values, windows, Some((vars, &knockoffs.values)))
}

/// Existential aggregation: reject iff any outcome falls below the level.
fn aggregate_decision(outcomes: &[TestOutcome], alpha_eff: f64) -> bool {
    outcomes.iter().any(|o| decide(o, alpha_eff))
}

/// Test the directed edge source → target given baseline residuals and the
/// residuals after intervening on the source group. One two-sample test per
/// variable of the target group; the edge is present iff the smallest
/// p-value is below alpha (divided by the group size under bonferroni).
pub fn group_edge_test(
    baseline: &Matrix,
    intervened: &Matrix,
    partition: &GroupPartition,
    source: usize,
    target: usize,
    config: &DiscoveryConfig,
) -> Result<EdgeEvidence> {
    config.validate()?;
    let g = partition.num_groups();
    if source >= g || target >= g {
        return Err(CoreError::data("group index out of range"));
    }
    if source == target {
        return Err(CoreError::data("source and target group must differ"));
    }
    let n = partition.num_vars();
    if baseline.cols != n || intervened.cols != n {
        return Err(CoreError::data(
            "residual matrices do not cover all partition variables",
        ));
    }
    if baseline.rows != intervened.rows {
        return Err(CoreError::data(
            "baseline and intervened residuals have different window counts",
        ));
    }
    let vars = partition.groups[target].clone();
    let alpha_eff = if config.bonferroni {
        config.alpha / vars.len() as f64
    } else {
        config.alpha
    };
    let mut outcomes = Vec::with_capacity(vars.len());
    for &v in &vars {
        let a: Vec<f64> = (0..baseline.rows).map(|r| baseline.get(r, v)).collect();
        let b: Vec<f64> = (0..intervened.rows).map(|r| intervened.get(r, v)).collect();
        let seed = mix_seed(
            config.seed,
            &[TEST_TAG, source as u64, target as u64, v as u64],
        );
        outcomes.push(two_sample_test(config.test, &a, &b, seed)?);
    }
    let decision = aggregate_decision(&outcomes, alpha_eff);
    Ok(EdgeEvidence {
        source,
        target,
        variables: vars,
        outcomes,
        decision,
    })
}

/// Run the full discovery procedure on a panel under a group partition.
///
/// The panel is standardized; one forecaster is trained on all variables;
/// one knockoff copy is sampled; baseline residuals are computed once. Every
/// ordered group pair is then tested by substituting the source group's
/// knockoff columns. Deterministic given the config seed.
pub fn discover(
    panel: &TimeSeriesPanel,
    partition: &GroupPartition,
    config: &DiscoveryConfig,
) -> Result<DiscoveryResult> {
    config.validate()?;
    if partition.num_vars() != panel.num_vars() {
        return Err(CoreError::data(format!(
            "partition covers {} variables but the panel has {}",
            partition.num_vars(),
            panel.num_vars()
        )));
    }
    let g = partition.num_groups();
    if g == 1 {
        return Ok(DiscoveryResult {
            graph: GroupCausalGraph::empty(1),
            evidence: Vec::new(),
        });
    }
    let (std_panel, _) = standardize(panel)?;
    let values = &std_panel.values;
    let mut fc = config.forecaster.clone();
    fc.seed = mix_seed(config.seed, &[TRAIN_TAG, config.forecaster.seed]);
    let (model, _losses) = Forecaster::train(values, &fc)?;
    let moments = estimate_moments(values, config.shrinkage)?;
    let s = equicorrelated_s(&moments.correlation)?;
    let knockoffs = sample_knockoffs(
        values,
        &moments,
        &s,
        mix_seed(config.seed, &[KNOCK_TAG]),
    )?;
    let windows = make_windows(
        values.rows,
        fc.context_len,
        fc.horizon,
        config.effective_stride(),
    )?;
    let baseline = model.residuals(values, &windows, None)?;
    let mut graph = GroupCausalGraph::empty(g);
    let mut evidence = Vec::with_capacity(g * (g - 1));
    for i in 0..g {
        let intervened = intervene_group(&model, values, &knockoffs, partition, i, &windows)?;
        for j in 0..g {
            if i == j {
                continue;
            }
            let ev = group_edge_test(&baseline, &intervened, partition, i, j, config)?;
            graph.set_edge(i, j, ev.decision);
            evidence.push(ev);
        }
    }
    Ok(DiscoveryResult { graph, evidence })
}

/// Variable-level discovery: [`discover`] under the singleton partition.
pub fn discover_pairwise(panel: &TimeSeriesPanel, config: &DiscoveryConfig) -> Result<DiscoveryResult> {
    let partition = GroupPartition::singletons(panel.num_vars());
    discover(panel, &partition, config)
}

/// Discovery outcome for one regime segment; `result` is None when the
/// segment supports fewer than [`MIN_SEGMENT_WINDOWS`] residual windows.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SegmentDiscovery {
    pub segment: crate::regimes::RegimeSegment,
    pub result: Option<DiscoveryResult>,
}

/// Fractions of analyzed segments showing each link type for the unordered
/// group pair (a, b) with a < b. The four fractions sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairOccurrence {
    pub group_a: usize,
    pub group_b: usize,
    /// a → b only.
    pub forward: f64,
    /// b → a only.
    pub backward: f64,
    pub bidirectional: f64,
    pub none: f64,
}

/// Per-segment graphs plus fractional link occurrence across regimes.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegimeDiscoveryResult {
    pub segments: Vec<SegmentDiscovery>,
    pub occurrence: Vec<PairOccurrence>,
    /// Number of segments long enough to analyze.
    pub analyzed: usize,
}

/// Run discovery independently on each regime segment and aggregate the
/// per-pair link labels into fractional occurrences over the analyzed
/// segments. Segments too short for [`MIN_SEGMENT_WINDOWS`] residual windows
/// are reported but skipped; it is an error if no segment is analyzable.
pub fn discover_regimes(
    panel: &TimeSeriesPanel,
    partition: &GroupPartition,
    labels: &RegimeLabels,
    config: &DiscoveryConfig,
) -> Result<RegimeDiscoveryResult> {
    config.validate()?;
    if labels.segments.is_empty() {
        return Err(CoreError::data("regime labels contain no segments"));
    }
    if labels.segments.last().map(|s| s.end) > Some(panel.len()) {
        return Err(CoreError::data(
            "regime segments extend past the end of the panel",
        ));
    }
    let p = config.forecaster.context_len;
    let tf = config.forecaster.horizon;
    let stride = config.effective_stride();
    let g = partition.num_groups();
    let mut segments = Vec::with_capacity(labels.segments.len());
    let mut counts: Vec<Vec<[usize; 4]>> = vec![vec![[0; 4]; g]; g];
    let mut analyzed = 0usize;
    for (idx, seg) in labels.segments.iter().enumerate() {
        let len = seg.end - seg.start;
        let enough = len >= p + tf && (len - p - tf) / stride + 1 >= MIN_SEGMENT_WINDOWS;
        if !enough {
            segments.push(SegmentDiscovery {
                segment: *seg,
                result: None,
            });
            continue;
        }
        let sub = panel.slice_rows(seg.start, seg.end)?;
        let mut sub_config = config.clone();
        sub_config.seed = mix_seed(config.seed, &[REGIME_TAG, idx as u64]);
        let result = discover(&sub, partition, &sub_config)?;
        analyzed += 1;
        for a in 0..g {
            for b in a + 1..g {
                let slot = match result.graph.pair_label(a, b) {
                    crate::data::PairLabel::Forward => 0,
                    crate::data::PairLabel::Backward => 1,
                    crate::data::PairLabel::Bidirectional => 2,
                    crate::data::PairLabel::None => 3,
                };
                counts[a][b][slot] += 1;
            }
        }
        segments.push(SegmentDiscovery {
            segment: *seg,
            result: Some(result),
        });
    }
    if analyzed == 0 {
        return Err(CoreError::data(
            "no regime segment supports enough residual windows for discovery",
        ));
    }
    let mut occurrence = Vec::new();
    for a in 0..g {
        for b in a + 1..g {
            let c = counts[a][b];
            let denom = analyzed as f64;
            occurrence.push(PairOccurrence {
                group_a: a,
                group_b: b,
                forward: c[0] as f64 / denom,
                backward: c[1] as f64 / denom,
                bidirectional: c[2] as f64 / denom,
                none: c[3] as f64 / denom,
            });
        }
    }
    Ok(RegimeDiscoveryResult {
        segments,
        occurrence,
        analyzed,
    })
}
