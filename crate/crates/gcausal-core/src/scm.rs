//! Structural causal model benchmarks: lagged functional equations with
//! additive Gaussian noise, plus the implied ground-truth group graph.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{GroupCausalGraph, GroupPartition, TimeSeriesPanel};
use crate::error::{CoreError, Result};
use crate::fmath;
use crate::linalg::Matrix;
use crate::rng::Prng;

/// Functional form of one edge. The polynomial tags evaluate tanh(x²) and
/// tanh(x³): bounded like sin/cos, so a spec passing the stability guard
/// cannot diverge, while keeping a genuinely nonlinear response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionTag {
    Linear,
    Sin,
    Cos,
    Poly2,
    Poly3,
}

impl FunctionTag {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            FunctionTag::Linear => x,
            FunctionTag::Sin => fmath::sin(x),
            FunctionTag::Cos => fmath::cos(x),
            FunctionTag::Poly2 => fmath::tanh(x * x),
            FunctionTag::Poly3 => fmath::tanh(x * x * x),
        }
    }

    pub fn is_linear(self) -> bool {
        self == FunctionTag::Linear
    }
}

/// One lagged edge src → dst: dst(t) += coefficient · f(src(t − lag)).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScmEdge {
    pub src: usize,
    pub dst: usize,
    pub lag: usize,
    pub function: FunctionTag,
    pub coefficient: f64,
}

/// Generative ground-truth model.
///
/// Invariants enforced by [`ScmSpec::new`]: every lag in 1..=max_lag, every
/// variable has a self-edge, and per variable the sum of |coefficient| over
/// incoming *linear* edges is at most 0.9 (stability guard; the bounded
/// nonlinear forms are exempt).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScmSpec {
    pub partition: GroupPartition,
    pub edges: Vec<ScmEdge>,
    pub noise_std: f64,
    pub density: f64,
    pub nonlinearity: f64,
    pub max_lag: usize,
    pub seed: u64,
}

impl ScmSpec {
    pub fn new(
        partition: GroupPartition,
        edges: Vec<ScmEdge>,
        noise_std: f64,
        density: f64,
        nonlinearity: f64,
        max_lag: usize,
        seed: u64,
    ) -> Result<Self> {
        let n = partition.num_vars();
        if noise_std <= 0.0 {
            return Err(CoreError::config("noise_std must be positive"));
        }
        if max_lag == 0 {
            return Err(CoreError::config("max_lag must be >= 1"));
        }
        let mut has_self = vec![false; n];
        let mut linear_in = vec![0.0; n];
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(CoreError::config(format!(
                    "edge {} -> {} references a variable outside 0..{n}",
                    e.src, e.dst
                )));
            }
            if e.lag == 0 || e.lag > max_lag {
                return Err(CoreError::config(format!(
                    "edge {} -> {} has lag {} outside 1..={max_lag}",
                    e.src, e.dst, e.lag
                )));
            }
            if e.src == e.dst {
                has_self[e.src] = true;
            }
            if e.function.is_linear() {
                linear_in[e.dst] += fmath::abs(e.coefficient);
            }
        }
        if let Some(v) = has_self.iter().position(|h| !h) {
            return Err(CoreError::config(format!(
                "variable {v} has no autoregressive self-edge"
            )));
        }
        for (v, &s) in linear_in.iter().enumerate() {
            if s > 0.9 + 1e-12 {
                return Err(CoreError::config(format!(
                    "stability guard violated: variable {v} has linear incoming weight {s:.4} > 0.9"
                )));
            }
        }
        Ok(ScmSpec {
            partition,
            edges,
            noise_std,
            density,
            nonlinearity,
            max_lag,
            seed,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.partition.num_vars()
    }
}

/// Draw a random spec with exactly round(density · P) cross-group edges,
/// where P counts admissible ordered cross-group variable pairs, and
/// round(nonlinearity · edges) nonlinear tags among them.
///
/// Construction, in fixed draw order: linear lag-1 self-edges (coefficient
/// 0.5) for every variable; cross-group pair selection by shuffled
/// enumeration; nonlinear tag assignment by a second shuffle; per-edge lag,
/// magnitude in [0.3, 0.8], and sign; within-group coupling with fixed
/// probability 0.3 (always linear). Finally the non-self linear incoming
/// coefficients of each variable are rescaled down, if needed, so the
/// stability guard holds with the self-edge untouched.
pub fn sample_spec(
    partition: &GroupPartition,
    density: f64,
    nonlinearity: f64,
    max_lag: usize,
    noise_std: f64,
    seed: u64,
) -> Result<ScmSpec> {
    if !(0.0..=1.0).contains(&density) || !(0.0..=1.0).contains(&nonlinearity) {
        return Err(CoreError::config("density and nonlinearity must lie in [0, 1]"));
    }
    if max_lag == 0 {
        return Err(CoreError::config("max_lag must be >= 1"));
    }
    let n = partition.num_vars();
    let group_of = partition.group_of_vars();
    let mut rng = Prng::new(seed);

    let mut edges: Vec<ScmEdge> = (0..n)
        .map(|v| ScmEdge {
            src: v,
            dst: v,
            lag: 1,
            function: FunctionTag::Linear,
            coefficient: 0.5,
        })
        .collect();

    // Admissible pairs are cross-group only; within-group structure is not
    // part of the density budget.
    let mut cross_pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if group_of[a] != group_of[b] {
                cross_pairs.push((a, b));
            }
        }
    }
    let p_count = cross_pairs.len();
    let n_edges = fmath::round(density * p_count as f64) as usize;
    let mut order: Vec<usize> = (0..p_count).collect();
    rng.shuffle(&mut order);
    let mut selected: Vec<(usize, usize)> = order[..n_edges].iter().map(|&i| cross_pairs[i]).collect();
    selected.sort_unstable();

    let n_nonlinear = fmath::round(nonlinearity * n_edges as f64) as usize;
    let nl_order = rng.permutation(n_edges);
    let mut is_nonlinear = vec![false; n_edges];
    for &i in nl_order.iter().take(n_nonlinear) {
        is_nonlinear[i] = true;
    }

    let nonlinear_tags = [
        FunctionTag::Sin,
        FunctionTag::Cos,
        FunctionTag::Poly2,
        FunctionTag::Poly3,
    ];
    for (idx, &(src, dst)) in selected.iter().enumerate() {
        let lag = 1 + rng.below(max_lag);
        let magnitude = rng.uniform_range(0.3, 0.8);
        let sign = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
        let function = if is_nonlinear[idx] {
            nonlinear_tags[rng.below(4)]
        } else {
            FunctionTag::Linear
        };
        edges.push(ScmEdge {
            src,
            dst,
            lag,
            function,
            coefficient: sign * magnitude,
        });
    }

    for a in 0..n {
        for b in 0..n {
            if a != b && group_of[a] == group_of[b] && rng.uniform() < 0.3 {
                let lag = 1 + rng.below(max_lag);
                let magnitude = rng.uniform_range(0.3, 0.8);
                let sign = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
                edges.push(ScmEdge {
                    src: a,
                    dst: b,
                    lag,
                    function: FunctionTag::Linear,
                    coefficient: sign * magnitude,
                });
            }
        }
    }

    // Stability rescale: shrink every linear incoming weight of a variable
    // (self edge included) by a common factor to fit the 0.9 budget. The
    // uniform factor preserves the cross-to-self strength ratio, so denser
    // graphs dilute all signals equally instead of erasing cross effects.
    for v in 0..n {
        let total: f64 = edges
            .iter()
            .filter(|e| e.dst == v && e.function.is_linear())
            .map(|e| fmath::abs(e.coefficient))
            .sum();
        if total > 0.9 {
            let scale = 0.9 / total;
            for e in edges.iter_mut() {
                if e.dst == v && e.function.is_linear() {
                    e.coefficient *= scale;
                }
            }
        }
    }

    ScmSpec::new(
        partition.clone(),
        edges,
        noise_std,
        density,
        nonlinearity,
        max_lag,
        seed,
    )
}

/// Group graph implied by the spec: edge i → j iff some variable-level edge
/// crosses from group i into group j.
pub fn truth_graph(spec: &ScmSpec) -> GroupCausalGraph {
    let group_of = spec.partition.group_of_vars();
    let mut graph = GroupCausalGraph::empty(spec.partition.num_groups());
    for e in &spec.edges {
        let (gi, gj) = (group_of[e.src], group_of[e.dst]);
        if gi != gj {
            graph.set_edge(gi, gj, true);
        }
    }
    graph
}

/// Run the SCM forward: Z_t^j = Σ_edges coef · f(Z_{t−lag}^src) + η_t^j with
/// η ~ Normal(0, noise_std²) i.i.d., discarding the first `burn_in` steps.
///
/// The first max_lag rows are pure noise (no history exists yet); burn-in
/// must cover at least max_lag so the retained rows never see them.
pub fn simulate(
    spec: &ScmSpec,
    length: usize,
    burn_in: usize,
    seed: u64,
) -> Result<(TimeSeriesPanel, GroupCausalGraph)> {
    if length == 0 {
        return Err(CoreError::config("length must be >= 1"));
    }
    if burn_in < spec.max_lag {
        return Err(CoreError::config(format!(
            "burn_in {} must be at least max_lag {}",
            burn_in, spec.max_lag
        )));
    }
    let n = spec.num_vars();
    let total = length + burn_in;
    let mut rng = Prng::new(seed);
    let mut z = Matrix::zeros(total, n);
    for t in 0..total {
        let mut row = vec![0.0; n];
        for item in row.iter_mut() {
            *item = rng.normal_scaled(0.0, spec.noise_std);
        }
        if t >= spec.max_lag {
            for e in &spec.edges {
                row[e.dst] += e.coefficient * e.function.eval(z.get(t - e.lag, e.src));
            }
        }
        for (j, &v) in row.iter().enumerate() {
            if fmath::abs(v) > 1e6 {
                return Err(CoreError::numeric(format!(
                    "simulation diverged at step {t}, variable {j}; use smaller coefficients"
                )));
            }
            z.set(t, j, v);
        }
    }
    let mut kept = Matrix::zeros(length, n);
    for t in 0..length {
        kept.row_mut(t).copy_from_slice(z.row(burn_in + t));
    }
    Ok((TimeSeriesPanel::from_values(kept)?, truth_graph(spec)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partition_2x2() -> GroupPartition {
        GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap()
    }

    fn cross_edges(spec: &ScmSpec) -> Vec<&ScmEdge> {
        let g = spec.partition.group_of_vars();
        spec.edges.iter().filter(|e| g[e.src] != g[e.dst]).collect()
    }

    #[test]
    fn zero_density_has_no_cross_edges() {
        let spec = sample_spec(&partition_2x2(), 0.0, 0.0, 1, 1.0, 3).unwrap();
        assert!(cross_edges(&spec).is_empty());
        assert_eq!(truth_graph(&spec).num_edges(), 0);
    }

    #[test]
    fn full_density_realizes_all_pairs() {
        let spec = sample_spec(&partition_2x2(), 1.0, 0.0, 1, 1.0, 3).unwrap();
        assert_eq!(cross_edges(&spec).len(), 8);
        let g = truth_graph(&spec);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        assert_eq!(g.pair_label(0, 1), crate::data::PairLabel::Bidirectional);
    }

    #[test]
    fn edge_counts_match_density_and_nonlinearity() {
        // 4 groups x 2 vars: P = 64 - 16 = 48; rho=0.5 -> 24 edges, nu=0.5 -> 12 nonlinear
        let part = GroupPartition::new(
            vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]],
            8,
        )
        .unwrap();
        let spec = sample_spec(&part, 0.5, 0.5, 2, 1.0, 7).unwrap();
        let cross = cross_edges(&spec);
        assert_eq!(cross.len(), 24);
        assert_eq!(cross.iter().filter(|e| !e.function.is_linear()).count(), 12);
    }

    #[test]
    fn sampled_specs_satisfy_stability_guard() {
        for seed in 0..20 {
            let part = GroupPartition::new(
                vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]],
                8,
            )
            .unwrap();
            let spec = sample_spec(&part, 0.9, 0.3, 2, 1.0, seed).unwrap();
            for v in 0..8 {
                let s: f64 = spec
                    .edges
                    .iter()
                    .filter(|e| e.dst == v && e.function.is_linear())
                    .map(|e| fmath::abs(e.coefficient))
                    .sum();
                assert!(s <= 0.9 + 1e-9, "seed {seed} var {v}: {s}");
            }
        }
    }

    #[test]
    fn stability_guard_rejects_large_self_edge() {
        let part = GroupPartition::new(vec![vec![0]], 1).unwrap();
        let err = ScmSpec::new(
            part,
            vec![ScmEdge {
                src: 0,
                dst: 0,
                lag: 1,
                function: FunctionTag::Linear,
                coefficient: 1.5,
            }],
            1.0,
            0.0,
            0.0,
            1,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::InvalidConfig(_)));
    }

    #[test]
    fn missing_self_edge_rejected() {
        let part = GroupPartition::new(vec![vec![0, 1]], 2).unwrap();
        let err = ScmSpec::new(
            part,
            vec![ScmEdge {
                src: 0,
                dst: 0,
                lag: 1,
                function: FunctionTag::Linear,
                coefficient: 0.5,
            }],
            1.0,
            0.0,
            0.0,
            1,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::InvalidConfig(_)));
    }

    #[test]
    fn ar1_autocorrelation_matches_coefficient() {
        // Singleton groups at rho=0 leave only the 0.5 lag-1 self-edges,
        // i.e. independent AR(1) processes with autocorrelation 0.5.
        let part = GroupPartition::singletons(2);
        let spec = sample_spec(&part, 0.0, 0.0, 1, 1.0, 5).unwrap();
        let (panel, graph) = simulate(&spec, 2000, 200, 11).unwrap();
        assert_eq!(graph.num_edges(), 0);
        for c in 0..2 {
            let col = panel.values.column(c);
            let mean: f64 = col.iter().sum::<f64>() / col.len() as f64;
            let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / col.len() as f64;
            let mut acov = 0.0;
            for t in 1..col.len() {
                acov += (col[t] - mean) * (col[t - 1] - mean);
            }
            acov /= (col.len() - 1) as f64;
            let ac1 = acov / var;
            assert!(
                fmath::abs(ac1 - 0.5) < 0.1,
                "lag-1 autocorrelation {ac1} not near 0.5"
            );
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = sample_spec(&partition_2x2(), 0.5, 0.5, 2, 1.0, 9).unwrap();
        let (p1, _) = simulate(&spec, 500, 200, 21).unwrap();
        let (p2, _) = simulate(&spec, 500, 200, 21).unwrap();
        assert_eq!(p1.values.data, p2.values.data);
        let (p3, _) = simulate(&spec, 500, 200, 22).unwrap();
        assert_ne!(p1.values.data, p3.values.data);
    }

    #[test]
    fn truth_graph_from_single_edge() {
        let part = partition_2x2();
        let mut edges: Vec<ScmEdge> = (0..4)
            .map(|v| ScmEdge {
                src: v,
                dst: v,
                lag: 1,
                function: FunctionTag::Linear,
                coefficient: 0.5,
            })
            .collect();
        edges.push(ScmEdge {
            src: 0,
            dst: 2,
            lag: 1,
            function: FunctionTag::Linear,
            coefficient: 0.4,
        });
        let spec = ScmSpec::new(part, edges, 1.0, 0.0, 0.0, 1, 0).unwrap();
        let g = truth_graph(&spec);
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 0));
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn dense_nonlinear_simulation_stays_bounded() {
        let part = GroupPartition::new(vec![vec![0, 1, 2], vec![3, 4, 5]], 6).unwrap();
        for seed in 0..5 {
            let spec = sample_spec(&part, 1.0, 1.0, 3, 1.0, seed).unwrap();
            let (panel, _) = simulate(&spec, 10_000, 200, seed + 100).unwrap();
            assert!(panel.values.is_finite());
        }
    }

    #[test]
    fn burn_in_only_affects_mixing() {
        let spec = sample_spec(&partition_2x2(), 0.5, 0.0, 2, 1.0, 13).unwrap();
        let (pa, _) = simulate(&spec, 5000, 200, 31).unwrap();
        let (pb, _) = simulate(&spec, 5000, 400, 31).unwrap();
        for c in 0..4 {
            let ma: f64 = pa.values.column(c).iter().sum::<f64>() / 5000.0;
            let mb: f64 = pb.values.column(c).iter().sum::<f64>() / 5000.0;
            assert!(fmath::abs(ma - mb) < 0.1, "col {c}: {ma} vs {mb}");
        }
    }

    #[test]
    fn burn_in_below_max_lag_rejected() {
        let spec = sample_spec(&partition_2x2(), 0.2, 0.0, 3, 1.0, 1).unwrap();
        assert!(simulate(&spec, 100, 2, 0).is_err());
    }
}
