//! Panel data model, standardization, windowing, and graph scoring.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fmath;
use crate::linalg::Matrix;

/// A T×N multivariate time series with named variables.
///
/// Invariants (enforced at construction): no non-finite entries, exactly N
/// unique variable names, T ≥ 1 and N ≥ 1.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeSeriesPanel {
    pub values: Matrix,
    pub variable_names: Vec<String>,
}

impl TimeSeriesPanel {
    pub fn new(values: Matrix, variable_names: Vec<String>) -> Result<Self> {
        if values.rows == 0 || values.cols == 0 {
            return Err(CoreError::data("panel must have at least one row and one column"));
        }
        if variable_names.len() != values.cols {
            return Err(CoreError::data(format!(
                "{} variable names for {} columns",
                variable_names.len(),
                values.cols
            )));
        }
        for (i, a) in variable_names.iter().enumerate() {
            for b in variable_names.iter().skip(i + 1) {
                if a == b {
                    return Err(CoreError::data(format!("duplicate variable name '{a}'")));
                }
            }
        }
        if !values.is_finite() {
            return Err(CoreError::data("panel contains non-finite values"));
        }
        Ok(TimeSeriesPanel {
            values,
            variable_names,
        })
    }

    /// Panel with synthetic names z0..z{N-1}.
    pub fn from_values(values: Matrix) -> Result<Self> {
        let names = (0..values.cols).map(|i| format!("z{i}")).collect();
        Self::new(values, names)
    }

    pub fn len(&self) -> usize {
        self.values.rows
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows == 0
    }

    pub fn num_vars(&self) -> usize {
        self.values.cols
    }

    /// Rows `start..end` as a new panel with the same names.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(CoreError::data(format!(
                "invalid row slice {start}..{end} of {}",
                self.len()
            )));
        }
        let mut m = Matrix::zeros(end - start, self.num_vars());
        for r in start..end {
            m.row_mut(r - start).copy_from_slice(self.values.row(r));
        }
        TimeSeriesPanel::new(m, self.variable_names.clone())
    }
}

/// Per-variable mean and standard deviation recorded by [`standardize`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scaling {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Center and scale every column to mean 0, std 1.
///
/// Standard deviations use the population convention (denominator n), the
/// crate-wide choice for panel statistics so that ports agree bitwise.
pub fn standardize(panel: &TimeSeriesPanel) -> Result<(TimeSeriesPanel, Scaling)> {
    let t = panel.len() as f64;
    let n = panel.num_vars();
    let mut mean = vec![0.0; n];
    let mut std = vec![0.0; n];
    for c in 0..n {
        let mut s = 0.0;
        for r in 0..panel.len() {
            s += panel.values.get(r, c);
        }
        mean[c] = s / t;
        let mut ss = 0.0;
        for r in 0..panel.len() {
            let d = panel.values.get(r, c) - mean[c];
            ss += d * d;
        }
        std[c] = fmath::sqrt(ss / t);
        if std[c] <= 0.0 {
            return Err(CoreError::data(format!(
                "variable '{}' has zero variance; cannot standardize",
                panel.variable_names[c]
            )));
        }
    }
    let mut out = Matrix::zeros(panel.len(), n);
    for r in 0..panel.len() {
        for c in 0..n {
            out.set(r, c, (panel.values.get(r, c) - mean[c]) / std[c]);
        }
    }
    Ok((
        TimeSeriesPanel::new(out, panel.variable_names.clone())?,
        Scaling { mean, std },
    ))
}

/// Invert [`standardize`].
pub fn destandardize(panel: &TimeSeriesPanel, scaling: &Scaling) -> Result<TimeSeriesPanel> {
    if scaling.mean.len() != panel.num_vars() {
        return Err(CoreError::data("scaling length does not match panel width"));
    }
    let mut out = Matrix::zeros(panel.len(), panel.num_vars());
    for r in 0..panel.len() {
        for c in 0..panel.num_vars() {
            out.set(r, c, panel.values.get(r, c) * scaling.std[c] + scaling.mean[c]);
        }
    }
    TimeSeriesPanel::new(out, panel.variable_names.clone())
}

/// One forecast window over a panel of length T: context rows are
/// `offset..offset+context`, target rows the following `target` rows.
/// Windows are descriptors rather than copies so the same window set can be
/// evaluated against a knockoff-substituted panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub offset: usize,
    /// Context length p.
    pub context: usize,
    /// Forecast horizon T_f.
    pub target: usize,
}

/// Cut a panel of `len` rows into forecast windows at offsets 0, s, 2s, ...
///
/// The window count is floor((T − p − t_f)/s) + 1.
pub fn make_windows(
    len: usize,
    context_len: usize,
    horizon: usize,
    stride: usize,
) -> Result<Vec<Window>> {
    if context_len == 0 || horizon == 0 || stride == 0 {
        return Err(CoreError::config("context_len, horizon, and stride must be >= 1"));
    }
    let need = context_len + horizon;
    if len < need {
        return Err(CoreError::data(format!(
            "panel length {len} is below the required minimum {need} (context {context_len} + horizon {horizon})"
        )));
    }
    let mut windows = Vec::new();
    let mut offset = 0;
    while offset + need <= len {
        windows.push(Window {
            offset,
            context: context_len,
            target: horizon,
        });
        offset += stride;
    }
    Ok(windows)
}

/// Assignment of the N variables into G disjoint, non-empty groups whose
/// union is {0..N-1}.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GroupPartition {
    pub groups: Vec<Vec<usize>>,
}

impl GroupPartition {
    pub fn new(groups: Vec<Vec<usize>>, num_vars: usize) -> Result<Self> {
        if groups.is_empty() {
            return Err(CoreError::data("partition must contain at least one group"));
        }
        let mut seen = vec![false; num_vars];
        for (gi, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(CoreError::data(format!("group {gi} is empty")));
            }
            for &v in g {
                if v >= num_vars {
                    return Err(CoreError::data(format!(
                        "group {gi} references variable {v}, but the panel has {num_vars} variables"
                    )));
                }
                if seen[v] {
                    return Err(CoreError::data(format!(
                        "variable {v} appears in more than one group"
                    )));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(CoreError::data(format!(
                "variable {v} is not assigned to any group"
            )));
        }
        Ok(GroupPartition { groups })
    }

    /// One group per variable; reduces group discovery to variable-level
    /// discovery.
    pub fn singletons(num_vars: usize) -> Self {
        GroupPartition {
            groups: (0..num_vars).map(|v| vec![v]).collect(),
        }
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn num_vars(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    /// Map each variable index to its group index.
    pub fn group_of_vars(&self) -> Vec<usize> {
        let mut map = vec![0; self.num_vars()];
        for (gi, g) in self.groups.iter().enumerate() {
            for &v in g {
                map[v] = gi;
            }
        }
        map
    }
}

/// Link label of an unordered group pair, a pure function of the two
/// directed adjacency entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    None,
    /// i → j for the ordered arguments (i, j) of [`GroupCausalGraph::pair_label`].
    Forward,
    /// j → i.
    Backward,
    Bidirectional,
}

/// Directed group-level causal graph: entry (i, j) asserts "group i causes
/// group j". The diagonal is never true.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GroupCausalGraph {
    pub groups: usize,
    pub adjacency: Vec<Vec<bool>>,
}

impl GroupCausalGraph {
    pub fn empty(groups: usize) -> Self {
        GroupCausalGraph {
            groups,
            adjacency: vec![vec![false; groups]; groups],
        }
    }

    pub fn from_adjacency(adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let g = adjacency.len();
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != g {
                return Err(CoreError::data("adjacency matrix is not square"));
            }
            if row[i] {
                return Err(CoreError::data(format!(
                    "self-edge at group {i}: diagonal must be false"
                )));
            }
        }
        Ok(GroupCausalGraph {
            groups: g,
            adjacency,
        })
    }

    pub fn set_edge(&mut self, from: usize, to: usize, present: bool) {
        if from != to {
            self.adjacency[from][to] = present;
        }
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adjacency[from][to]
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency
            .iter()
            .map(|r| r.iter().filter(|&&b| b).count())
            .sum()
    }

    pub fn pair_label(&self, i: usize, j: usize) -> PairLabel {
        match (self.adjacency[i][j], self.adjacency[j][i]) {
            (false, false) => PairLabel::None,
            (true, false) => PairLabel::Forward,
            (false, true) => PairLabel::Backward,
            (true, true) => PairLabel::Bidirectional,
        }
    }
}

/// Precision/recall/F over directed edges, with the raw counts.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraphScore {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Score a predicted graph against the truth over all ordered pairs i ≠ j.
///
/// A bidirectional link counts as two directed edges. Empty denominators
/// score 1 (vacuous precision/recall); F is 0 when both P and R are 0.
pub fn score_graph(predicted: &GroupCausalGraph, truth: &GroupCausalGraph) -> Result<GraphScore> {
    if predicted.groups != truth.groups {
        return Err(CoreError::data(format!(
            "group count mismatch: predicted {} vs truth {}",
            predicted.groups, truth.groups
        )));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for i in 0..truth.groups {
        for j in 0..truth.groups {
            if i == j {
                continue;
            }
            match (predicted.has_edge(i, j), truth.has_edge(i, j)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f_score = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(GraphScore {
        precision,
        recall,
        f_score,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

/// Windowed forecast errors of one variable; observational (R) or
/// interventional (R̃) depending on how they were produced.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResidualSample {
    pub variable_index: usize,
    pub errors: Vec<f64>,
}

impl ResidualSample {
    pub fn new(variable_index: usize, errors: Vec<f64>) -> Result<Self> {
        if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(CoreError::numeric(format!(
                "residuals of variable {variable_index} contain negative or non-finite entries"
            )));
        }
        Ok(ResidualSample {
            variable_index,
            errors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel_from(rows: usize, cols: usize, data: Vec<f64>) -> TimeSeriesPanel {
        TimeSeriesPanel::from_values(Matrix::from_vec(rows, cols, data)).unwrap()
    }

    #[test]
    fn panel_rejects_bad_input() {
        assert!(TimeSeriesPanel::from_values(Matrix::from_vec(1, 2, vec![1.0, f64::NAN])).is_err());
        assert!(TimeSeriesPanel::new(
            Matrix::from_vec(1, 2, vec![1.0, 2.0]),
            vec!["a".into(), "a".into()]
        )
        .is_err());
    }

    #[test]
    fn standardize_hand_example() {
        // column {1,2,3} -> {-1,0,1} with mean 2, population std 1
        let p = panel_from(3, 1, vec![1.0, 2.0, 3.0]);
        let (s, sc) = standardize(&p).unwrap();
        assert_eq!(sc.mean, vec![2.0]);
        assert_eq!(sc.std, vec![fmath::sqrt(2.0 / 3.0)]);
        let col = s.values.column(0);
        assert!(fmath::abs(col[1]) < 1e-12);
        assert!(fmath::abs(col[0] + col[2]) < 1e-12);
        // moments after standardization
        let mean: f64 = col.iter().sum::<f64>() / 3.0;
        let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 3.0;
        assert!(fmath::abs(mean) < 1e-10);
        assert!(fmath::abs(fmath::sqrt(var) - 1.0) < 1e-10);
    }

    #[test]
    fn standardize_is_idempotent() {
        let mut rng = crate::rng::Prng::new(1);
        let data: Vec<f64> = (0..200).map(|_| rng.normal() * 3.0 + 5.0).collect();
        let p = panel_from(100, 2, data);
        let (s1, _) = standardize(&p).unwrap();
        let (s2, _) = standardize(&s1).unwrap();
        assert!(s2.values.sub(&s1.values).max_abs() < 1e-10);
    }

    #[test]
    fn standardize_round_trip() {
        let mut rng = crate::rng::Prng::new(2);
        let data: Vec<f64> = (0..300).map(|_| rng.normal() * 2.0 - 1.0).collect();
        let p = panel_from(100, 3, data);
        let (s, sc) = standardize(&p).unwrap();
        let back = destandardize(&s, &sc).unwrap();
        assert!(back.values.sub(&p.values).max_abs() < 1e-9);
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let p = panel_from(3, 1, vec![5.0, 5.0, 5.0]);
        let err = standardize(&p).unwrap_err();
        assert!(matches!(err, CoreError::InvalidData(_)));
    }

    #[test]
    fn windows_enumerate_offsets() {
        // T=10, p=4, T_f=2, s=2 -> 3 windows at offsets 0, 2, 4
        let w = make_windows(10, 4, 2, 2).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(
            w.iter().map(|x| x.offset).collect::<Vec<_>>(),
            vec![0, 2, 4]
        );
        assert_eq!(w[1].context, 4);
        assert_eq!(w[1].target, 2);
    }

    #[test]
    fn windows_boundaries() {
        assert_eq!(make_windows(6, 4, 2, 1).unwrap().len(), 1);
        assert!(make_windows(5, 4, 2, 1).is_err());
        assert!(make_windows(10, 0, 2, 1).is_err());
        assert!(make_windows(10, 4, 2, 0).is_err());
    }

    #[test]
    fn windows_tile_without_gap_at_full_stride() {
        let w = make_windows(12, 2, 2, 4).unwrap();
        // Each window covers 4 rows; stride 4 tiles 12 rows exactly.
        assert_eq!(w.len(), 3);
        let mut covered = Vec::new();
        for win in &w {
            covered.extend(win.offset..win.offset + win.context + win.target);
        }
        assert_eq!(covered, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn partition_validation() {
        assert!(GroupPartition::new(vec![vec![0, 1], vec![2]], 3).is_ok());
        assert!(GroupPartition::new(vec![vec![0], vec![0]], 2).is_err()); // overlap
        assert!(GroupPartition::new(vec![vec![0]], 2).is_err()); // not covering
        assert!(GroupPartition::new(vec![vec![0], vec![]], 1).is_err()); // empty group
        assert!(GroupPartition::new(vec![vec![0, 5]], 2).is_err()); // out of range
    }

    #[test]
    fn pair_labels() {
        let mut g = GroupCausalGraph::empty(3);
        g.set_edge(0, 1, true);
        g.set_edge(1, 2, true);
        g.set_edge(2, 1, true);
        assert_eq!(g.pair_label(0, 1), PairLabel::Forward);
        assert_eq!(g.pair_label(1, 0), PairLabel::Backward);
        assert_eq!(g.pair_label(1, 2), PairLabel::Bidirectional);
        assert_eq!(g.pair_label(0, 2), PairLabel::None);
    }

    #[test]
    fn no_self_edges() {
        let mut g = GroupCausalGraph::empty(2);
        g.set_edge(0, 0, true); // silently ignored
        assert!(!g.has_edge(0, 0));
        assert!(GroupCausalGraph::from_adjacency(vec![vec![true, false], vec![false, false]]).is_err());
    }

    #[test]
    fn score_identity_is_one() {
        let mut t = GroupCausalGraph::empty(3);
        t.set_edge(0, 1, true);
        t.set_edge(2, 0, true);
        let s = score_graph(&t, &t).unwrap();
        assert_eq!(s.f_score, 1.0);
    }

    #[test]
    fn score_hand_example() {
        // TP=2, FP=1, FN=0 -> P=2/3, R=1, F=0.8
        let mut truth = GroupCausalGraph::empty(3);
        truth.set_edge(0, 1, true);
        truth.set_edge(1, 2, true);
        let mut pred = truth.clone();
        pred.set_edge(2, 0, true);
        let s = score_graph(&pred, &truth).unwrap();
        assert!(fmath::abs(s.precision - 2.0 / 3.0) < 1e-12);
        assert_eq!(s.recall, 1.0);
        assert!(fmath::abs(s.f_score - 0.8) < 1e-12);
    }

    #[test]
    fn score_empty_prediction() {
        let mut truth = GroupCausalGraph::empty(2);
        truth.set_edge(0, 1, true);
        let s = score_graph(&GroupCausalGraph::empty(2), &truth).unwrap();
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.f_score, 0.0);
        assert_eq!(s.precision, 1.0); // vacuous
    }

    #[test]
    fn score_invariant_under_relabeling() {
        let mut truth = GroupCausalGraph::empty(3);
        truth.set_edge(0, 1, true);
        truth.set_edge(1, 2, true);
        let mut pred = GroupCausalGraph::empty(3);
        pred.set_edge(0, 1, true);
        pred.set_edge(2, 0, true);
        let base = score_graph(&pred, &truth).unwrap();
        // relabel groups by permutation (0,1,2) -> (2,0,1)
        let perm = [2usize, 0, 1];
        let mut truth_p = GroupCausalGraph::empty(3);
        let mut pred_p = GroupCausalGraph::empty(3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    truth_p.set_edge(perm[i], perm[j], truth.has_edge(i, j));
                    pred_p.set_edge(perm[i], perm[j], pred.has_edge(i, j));
                }
            }
        }
        let permuted = score_graph(&pred_p, &truth_p).unwrap();
        assert_eq!(base, permuted);
    }

    #[test]
    fn residual_sample_rejects_negatives() {
        assert!(ResidualSample::new(0, vec![0.1, -0.2]).is_err());
        assert!(ResidualSample::new(0, vec![0.1, 0.2]).is_ok());
    }
}
