//! Canonical-correlation baselines.
//!
//! Groups are reduced to single canonical variables, either pairwise or
//! jointly over all groups, and causality is then tested on the reduced
//! panel: VAR Granger tests give the MC-VGC baseline, knockoff discovery on
//! the canonical panel gives MC-CDMI.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{standardize, GroupCausalGraph, GroupPartition, TimeSeriesPanel};
use crate::engine::{discover_pairwise, DiscoveryConfig};
use crate::error::{CoreError, Result};
use crate::fmath;
use crate::linalg::{cholesky, dot, solve_lower, solve_lower_transpose, sym_eigen, Matrix};
use crate::stats::f_sf;

/// Relative ridge added to group covariances before inversion.
const GROUP_RIDGE: f64 = 1e-6;
/// Relative ridge added to the VAR normal equations; keeps collinear
/// canonical columns (identical-copy groups) solvable.
const VAR_RIDGE: f64 = 1e-8;

/// Canonical coefficients and correlations.
///
/// `coefficients[g]` maps group g's variables (in group order) to its
/// canonical variable with unit variance under the group covariance. For
/// [`pairwise_cca`], `canonical_correlations` holds the single leading
/// correlation; for [`mcca_reduce`], the achieved correlation of every
/// unordered canonical-variable pair in lexicographic order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CcaResult {
    pub coefficients: Vec<Vec<f64>>,
    pub canonical_correlations: Vec<f64>,
}

/// Fitted vector autoregression: x_t = intercept + Σ_l coefficients[l-1]
/// x_{t-l} + e_t, with `coefficients[l-1][(i, j)]` the effect of variable j
/// at lag l on variable i.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VarModel {
    pub lag_order: usize,
    pub coefficients: Vec<Matrix>,
    pub intercept: Vec<f64>,
    pub residual_cov: Matrix,
}

/// Column means of selected columns.
fn column_means(values: &Matrix, cols: &[usize]) -> Vec<f64> {
    let mut means = vec![0.0; cols.len()];
    for r in 0..values.rows {
        let row = values.row(r);
        for (m, &c) in means.iter_mut().zip(cols) {
            *m += row[c];
        }
    }
    for m in means.iter_mut() {
        *m /= values.rows as f64;
    }
    means
}

/// Population cross-covariance block between two column sets.
fn cov_block(values: &Matrix, cols_a: &[usize], cols_b: &[usize]) -> Matrix {
    let means_a = column_means(values, cols_a);
    let means_b = column_means(values, cols_b);
    let mut cov = Matrix::zeros(cols_a.len(), cols_b.len());
    for r in 0..values.rows {
        let row = values.row(r);
        for (i, &ca) in cols_a.iter().enumerate() {
            let da = row[ca] - means_a[i];
            for (j, &cb) in cols_b.iter().enumerate() {
                let v = cov.get(i, j) + da * (row[cb] - means_b[j]);
                cov.set(i, j, v);
            }
        }
    }
    cov.scale(1.0 / values.rows as f64)
}

/// Add `rel · trace/n` to the diagonal.
fn ridge(cov: &Matrix, rel: f64) -> Matrix {
    let n = cov.rows;
    let trace: f64 = (0..n).map(|i| cov.get(i, i)).sum();
    let mut out = cov.clone();
    let lambda = rel * trace / n as f64;
    for i in 0..n {
        out.set(i, i, out.get(i, i) + lambda);
    }
    out
}

/// Quadratic form xᵀ A x.
fn quad_form(a: &Matrix, x: &[f64]) -> f64 {
    dot(&a.matvec(x), x)
}

/// True when the entry of largest magnitude is negative; used to fix the
/// arbitrary eigenvector sign deterministically.
fn needs_flip(v: &[f64]) -> bool {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if fmath::abs(*x) > fmath::abs(v[best]) {
            best = i;
        }
    }
    v[best] < 0.0
}

/// Square roots of the diagonal; errors on a non-positive variance.
fn diagonal_stds(cov: &Matrix) -> Result<Vec<f64>> {
    let mut stds = Vec::with_capacity(cov.rows);
    for i in 0..cov.rows {
        let v = cov.get(i, i);
        if v <= 0.0 {
            return Err(CoreError::data(format!(
                "variable {i} has non-positive variance"
            )));
        }
        stds.push(fmath::sqrt(v));
    }
    Ok(stds)
}

/// Rescale a covariance block to the correlation scale:
/// entry (i, j) divided by row_stds[i] · col_stds[j].
fn to_correlation(block: &Matrix, row_stds: &[f64], col_stds: &[f64]) -> Matrix {
    let mut out = block.clone();
    for i in 0..out.rows {
        for j in 0..out.cols {
            let v = out.get(i, j) / (row_stds[i] * col_stds[j]);
            out.set(i, j, v);
        }
    }
    out
}

/// Leading canonical pair of two variable groups observed over the same
/// rows.
///
/// Solves Σaa⁻¹ Σab Σbb⁻¹ Σabᵀ A = λ A through the symmetric whitened form
/// Lb⁻¹ Σabᵀ La⁻ᵀ, whose Gram matrix shares the eigenvalues; this keeps the
/// spectrum real by construction, so the complex-eigenvalue failure mode of
/// the unsymmetric formulation cannot arise. The canonical correlation is
/// √λ₁ clamped to [0, 1]; B-side coefficients are Σbb⁻¹ Σabᵀ A. Both sides
/// are normalized to unit variance under their raw group covariance.
pub fn pairwise_cca(xa: &Matrix, xb: &Matrix) -> Result<CcaResult> {
    let (t, da, db) = (xa.rows, xa.cols, xb.cols);
    if xb.rows != t {
        return Err(CoreError::data("group panels differ in length"));
    }
    if da == 0 || db == 0 {
        return Err(CoreError::data("groups must be non-empty"));
    }
    if t <= da + db {
        return Err(CoreError::data(format!(
            "need more than {} rows for groups of size {da} and {db}, got {t}",
            da + db
        )));
    }
    if !xa.is_finite() || !xb.is_finite() {
        return Err(CoreError::data("group panels contain non-finite values"));
    }
    let cols_a: Vec<usize> = (0..da).collect();
    let cols_b: Vec<usize> = (0..db).collect();
    let saa_raw = cov_block(xa, &cols_a, &cols_a);
    let sbb_raw = cov_block(xb, &cols_b, &cols_b);
    let mut joined = Matrix::zeros(t, da + db);
    for r in 0..t {
        joined.row_mut(r)[..da].copy_from_slice(xa.row(r));
        joined.row_mut(r)[da..].copy_from_slice(xb.row(r));
    }
    let idx_b: Vec<usize> = (da..da + db).collect();
    let sab_raw = cov_block(&joined, &cols_a, &idx_b);
    // solve on the correlation scale so the ridge is scale-free; the
    // canonical correlations are then invariant to per-variable rescaling
    let std_a = diagonal_stds(&saa_raw)?;
    let std_b = diagonal_stds(&sbb_raw)?;
    let saa = ridge(&to_correlation(&saa_raw, &std_a, &std_a), GROUP_RIDGE);
    let sbb = ridge(&to_correlation(&sbb_raw, &std_b, &std_b), GROUP_RIDGE);
    let sab = to_correlation(&sab_raw, &std_a, &std_b);
    let la = cholesky(&saa)
        .map_err(|_| CoreError::numeric("group covariance singular after ridge"))?;
    let lb = cholesky(&sbb)
        .map_err(|_| CoreError::numeric("group covariance singular after ridge"))?;
    // U = Lb⁻¹ Σabᵀ La⁻ᵀ, column by column of La⁻ᵀ applied through Σabᵀ
    let mut u = Matrix::zeros(db, da);
    let sab_t = sab.transpose();
    // W = Σabᵀ La⁻ᵀ: solve Laᵀ z = e_c is implicit; instead compute
    // La⁻¹ Σab first, transpose, then apply Lb⁻¹.
    let mut w = Matrix::zeros(da, db);
    for c in 0..db {
        let col: Vec<f64> = (0..da).map(|r| sab.get(r, c)).collect();
        let solved = solve_lower(&la, &col);
        for r in 0..da {
            w.set(r, c, solved[r]);
        }
    }
    let w_t = w.transpose();
    for c in 0..da {
        let col: Vec<f64> = (0..db).map(|r| w_t.get(r, c)).collect();
        let solved = solve_lower(&lb, &col);
        for r in 0..db {
            u.set(r, c, solved[r]);
        }
    }
    let gram = u.transpose().matmul(&u).symmetrize();
    let eig = sym_eigen(&gram)?;
    let lambda = eig.values[da - 1].clamp(0.0, 1.0);
    let y: Vec<f64> = (0..da).map(|r| eig.vectors.get(r, da - 1)).collect();
    let mut a = solve_lower_transpose(&la, &y);
    // B = Rbb⁻¹ Rabᵀ A on the correlation scale, paired with A before any
    // sign convention so the achieved correlation stays positive
    let rhs = sab_t.matvec(&a);
    let mut b = solve_lower_transpose(&lb, &solve_lower(&lb, &rhs));
    for (x, s) in a.iter_mut().zip(&std_a) {
        *x /= *s;
    }
    for (x, s) in b.iter_mut().zip(&std_b) {
        *x /= *s;
    }
    if needs_flip(&a) {
        for x in a.iter_mut().chain(b.iter_mut()) {
            *x = -*x;
        }
    }
    let var_a = quad_form(&saa_raw, &a);
    if var_a <= 0.0 {
        return Err(CoreError::numeric("degenerate canonical direction on side A"));
    }
    let norm_a = fmath::sqrt(var_a);
    for x in a.iter_mut() {
        *x /= norm_a;
    }
    let var_b = quad_form(&sbb_raw, &b);
    if var_b <= 0.0 {
        return Err(CoreError::numeric("degenerate canonical direction on side B"));
    }
    let norm_b = fmath::sqrt(var_b);
    for x in b.iter_mut() {
        *x /= norm_b;
    }
    Ok(CcaResult {
        coefficients: vec![a, b],
        canonical_correlations: vec![fmath::sqrt(lambda)],
    })
}

/// Reduce every group to one canonical variable by the sum-of-correlations
/// multi-set eigenproblem C a = λ D a, with C the full covariance and D its
/// block-diagonal part. Sub-vectors are normalized to unit group variance
/// and the canonical columns standardized. Returns the G-column panel and
/// the coefficients with the achieved pairwise canonical correlations.
pub fn mcca_reduce(
    panel: &TimeSeriesPanel,
    partition: &GroupPartition,
) -> Result<(TimeSeriesPanel, CcaResult)> {
    let n = panel.num_vars();
    let t = panel.len();
    if partition.num_vars() != n {
        return Err(CoreError::data(format!(
            "partition covers {} variables but the panel has {n}",
            partition.num_vars()
        )));
    }
    if t <= n + 1 {
        return Err(CoreError::data(format!(
            "need more than {} rows for {n} variables, got {t}",
            n + 1
        )));
    }
    let g = partition.num_groups();
    let values = &panel.values;
    // permuted order: group 0's variables, then group 1's, ...
    let order: Vec<usize> = partition.groups.iter().flatten().copied().collect();
    let c_raw = cov_block(values, &order, &order);
    // correlation scale keeps the ridge scale-free (see pairwise_cca)
    let stds = diagonal_stds(&c_raw)?;
    let c_corr = to_correlation(&c_raw, &stds, &stds);
    // ridge each diagonal block; C and D share the ridged blocks
    let mut c = c_corr.clone();
    let mut block_start = vec![0usize; g + 1];
    for (gi, group) in partition.groups.iter().enumerate() {
        block_start[gi + 1] = block_start[gi] + group.len();
    }
    let mut l = Matrix::zeros(n, n);
    for gi in 0..g {
        let (lo, hi) = (block_start[gi], block_start[gi + 1]);
        let d = hi - lo;
        let mut block = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                block.set(i, j, c_corr.get(lo + i, lo + j));
            }
        }
        let ridged = ridge(&block, GROUP_RIDGE);
        for i in 0..d {
            for j in 0..d {
                c.set(lo + i, lo + j, ridged.get(i, j));
            }
        }
        let lg = cholesky(&ridged)
            .map_err(|_| CoreError::numeric("group covariance singular after ridge"))?;
        for i in 0..d {
            for j in 0..=i {
                l.set(lo + i, lo + j, lg.get(i, j));
            }
        }
    }
    // M = L⁻¹ C L⁻ᵀ via two triangular solves
    let mut x = Matrix::zeros(n, n);
    for cidx in 0..n {
        let col: Vec<f64> = (0..n).map(|r| c.get(r, cidx)).collect();
        let solved = solve_lower(&l, &col);
        for r in 0..n {
            x.set(r, cidx, solved[r]);
        }
    }
    let x_t = x.transpose();
    let mut m = Matrix::zeros(n, n);
    for cidx in 0..n {
        let col: Vec<f64> = (0..n).map(|r| x_t.get(r, cidx)).collect();
        let solved = solve_lower(&l, &col);
        for r in 0..n {
            m.set(cidx, r, solved[r]);
        }
    }
    let eig = sym_eigen(&m.symmetrize())?;
    let y: Vec<f64> = (0..n).map(|r| eig.vectors.get(r, n - 1)).collect();
    let mut a = solve_lower_transpose(&l, &y);
    for (x, s) in a.iter_mut().zip(&stds) {
        *x /= *s;
    }
    // one global sign flip: per-group flips would change correlation signs
    if needs_flip(&a) {
        for x in a.iter_mut() {
            *x = -*x;
        }
    }
    let mut coefficients = Vec::with_capacity(g);
    for gi in 0..g {
        let (lo, hi) = (block_start[gi], block_start[gi + 1]);
        let d = hi - lo;
        let mut sub: Vec<f64> = a[lo..hi].to_vec();
        let mut block = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                block.set(i, j, c_raw.get(lo + i, lo + j));
            }
        }
        let var = quad_form(&block, &sub);
        if var <= 0.0 {
            return Err(CoreError::numeric(format!(
                "degenerate canonical direction for group {gi}"
            )));
        }
        let norm = fmath::sqrt(var);
        for v in sub.iter_mut() {
            *v /= norm;
        }
        coefficients.push(sub);
    }
    let mut canonical = Matrix::zeros(t, g);
    for r in 0..t {
        let row = values.row(r);
        for gi in 0..g {
            let mut acc = 0.0;
            for (coef, &v) in coefficients[gi].iter().zip(&partition.groups[gi]) {
                acc += coef * row[v];
            }
            canonical.set(r, gi, acc);
        }
    }
    let names: Vec<String> = (0..g).map(|gi| format!("c{gi}")).collect();
    let raw_panel = TimeSeriesPanel::new(canonical, names)?;
    // achieved pairwise correlations of the canonical columns
    let all: Vec<usize> = (0..g).collect();
    let ccov = cov_block(&raw_panel.values, &all, &all);
    let mut correlations = Vec::with_capacity(g * (g - 1) / 2);
    for i in 0..g {
        for j in i + 1..g {
            let denom = fmath::sqrt(ccov.get(i, i) * ccov.get(j, j));
            correlations.push(ccov.get(i, j) / denom);
        }
    }
    let (standardized, _) = standardize(&raw_panel)?;
    Ok((
        standardized,
        CcaResult {
            coefficients,
            canonical_correlations: correlations,
        },
    ))
}

/// Design matrix of lagged regressors with intercept: row t holds
/// [1, x_{t-1}, ..., x_{t-p}] for t in [p, T).
fn lag_design(values: &Matrix, p: usize) -> (Matrix, usize) {
    let (t, n) = (values.rows, values.cols);
    let k = n * p + 1;
    let t_eff = t - p;
    let mut design = Matrix::zeros(t_eff, k);
    for row in 0..t_eff {
        let tcur = row + p;
        let out = design.row_mut(row);
        out[0] = 1.0;
        for lag in 1..=p {
            let src = values.row(tcur - lag);
            out[1 + (lag - 1) * n..1 + lag * n].copy_from_slice(src);
        }
    }
    (design, t_eff)
}

/// Ridged least squares for one equation: returns coefficients and the
/// residual sum of squares.
fn ols_rss(design: &Matrix, target: &[f64]) -> Result<(Vec<f64>, f64)> {
    let k = design.cols;
    let gram = design.transpose().matmul(design);
    let gram = ridge(&gram, VAR_RIDGE);
    let l = cholesky(&gram)
        .map_err(|_| CoreError::numeric("rank-deficient regressor matrix"))?;
    let mut rhs = vec![0.0; k];
    for (r, &y) in target.iter().enumerate() {
        for (c, slot) in rhs.iter_mut().enumerate() {
            *slot += design.get(r, c) * y;
        }
    }
    let beta = solve_lower_transpose(&l, &solve_lower(&l, &rhs));
    let mut rss = 0.0;
    for (r, &y) in target.iter().enumerate() {
        let e = y - dot(design.row(r), &beta);
        rss += e * e;
    }
    Ok((beta, rss))
}

/// Fit a VAR(p) by per-equation least squares with intercept.
pub fn fit_var(panel: &TimeSeriesPanel, lag_order: usize) -> Result<VarModel> {
    let (t, n) = (panel.len(), panel.num_vars());
    if lag_order == 0 {
        return Err(CoreError::config("lag order must be positive"));
    }
    let k = n * lag_order + 1;
    if t <= k + 10 {
        return Err(CoreError::data(format!(
            "need more than {} rows to fit a VAR({lag_order}) on {n} variables, got {t}",
            k + 10
        )));
    }
    let (design, t_eff) = lag_design(&panel.values, lag_order);
    let mut coefficients = vec![Matrix::zeros(n, n); lag_order];
    let mut intercept = vec![0.0; n];
    let mut residuals = Matrix::zeros(t_eff, n);
    for eq in 0..n {
        let target: Vec<f64> = (0..t_eff)
            .map(|r| panel.values.get(r + lag_order, eq))
            .collect();
        let (beta, _) = ols_rss(&design, &target)?;
        intercept[eq] = beta[0];
        for lag in 1..=lag_order {
            for j in 0..n {
                coefficients[lag - 1].set(eq, j, beta[1 + (lag - 1) * n + j]);
            }
        }
        for (r, &y) in target.iter().enumerate() {
            residuals.set(r, eq, y - dot(design.row(r), &beta));
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let residual_cov = cov_block(&residuals, &all, &all);
    Ok(VarModel {
        lag_order,
        coefficients,
        intercept,
        residual_cov,
    })
}

/// Granger causality of column `src` on column `dst`: F-test of the full
/// lag regression against the one without src's lags. Returns the F
/// statistic and its p-value.
pub fn granger_test(
    panel: &TimeSeriesPanel,
    src: usize,
    dst: usize,
    lag_order: usize,
) -> Result<(f64, f64)> {
    let (t, n) = (panel.len(), panel.num_vars());
    if src >= n || dst >= n {
        return Err(CoreError::data("column index out of range"));
    }
    if src == dst {
        return Err(CoreError::data("source and destination must differ"));
    }
    if lag_order == 0 {
        return Err(CoreError::config("lag order must be positive"));
    }
    let k_full = n * lag_order + 1;
    if t <= k_full + 10 {
        return Err(CoreError::data(format!(
            "need more than {} rows for the Granger test, got {t}",
            k_full + 10
        )));
    }
    let (design, t_eff) = lag_design(&panel.values, lag_order);
    let target: Vec<f64> = (0..t_eff)
        .map(|r| panel.values.get(r + lag_order, dst))
        .collect();
    let (_, rss_full) = ols_rss(&design, &target)?;
    // restricted design: drop src's lag columns
    let keep: Vec<usize> = (0..design.cols)
        .filter(|&c| c == 0 || (c - 1) % n != src)
        .collect();
    let mut restricted = Matrix::zeros(t_eff, keep.len());
    for r in 0..t_eff {
        for (out_c, &c) in keep.iter().enumerate() {
            restricted.set(r, out_c, design.get(r, c));
        }
    }
    let (_, rss_restricted) = ols_rss(&restricted, &target)?;
    let df2 = (t_eff - k_full) as f64;
    if rss_full <= 1e-300 * rss_restricted.max(1.0) {
        // perfectly predictable target: evidence is overwhelming
        return Ok((f64::MAX, 0.0));
    }
    let numerator = (rss_restricted - rss_full).max(0.0) / lag_order as f64;
    let f = numerator / (rss_full / df2);
    let p = f_sf(f, lag_order as f64, df2);
    Ok((f, p))
}

/// MC-VGC baseline: reduce groups by multi-set CCA, then run pairwise
/// Granger tests on the canonical panel. Edge (i, j) iff p < alpha.
pub fn mc_vgc_discover(
    panel: &TimeSeriesPanel,
    partition: &GroupPartition,
    lag_order: usize,
    alpha: f64,
) -> Result<GroupCausalGraph> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CoreError::config(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let g = partition.num_groups();
    if g == 1 {
        return Ok(GroupCausalGraph::empty(1));
    }
    let (canonical, _) = mcca_reduce(panel, partition)?;
    let mut graph = GroupCausalGraph::empty(g);
    for i in 0..g {
        for j in 0..g {
            if i == j {
                continue;
            }
            let (_, p) = granger_test(&canonical, i, j, lag_order)?;
            graph.set_edge(i, j, p < alpha);
        }
    }
    Ok(graph)
}

/// MC-CDMI baseline: reduce groups by multi-set CCA, then run knockoff
/// discovery on the canonical panel with singleton groups.
pub fn mc_cdmi_discover(
    panel: &TimeSeriesPanel,
    partition: &GroupPartition,
    config: &DiscoveryConfig,
) -> Result<GroupCausalGraph> {
    let g = partition.num_groups();
    if g == 1 {
        return Ok(GroupCausalGraph::empty(1));
    }
    let (canonical, _) = mcca_reduce(panel, partition)?;
    Ok(discover_pairwise(&canonical, config)?.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Prng;

    fn noise_matrix(t: usize, n: usize, seed: u64) -> Matrix {
        let mut rng = Prng::derive(seed, &[17]);
        let mut m = Matrix::zeros(t, n);
        for r in 0..t {
            for c in 0..n {
                m.set(r, c, rng.normal());
            }
        }
        m
    }

    /// Two 2-variable groups sharing a latent factor, so the leading
    /// canonical correlation is strong and known to be under 1.
    fn coupled_groups(t: usize, seed: u64) -> (Matrix, Matrix) {
        let mut rng = Prng::derive(seed, &[19]);
        let mut xa = Matrix::zeros(t, 2);
        let mut xb = Matrix::zeros(t, 2);
        for r in 0..t {
            let shared = rng.normal();
            xa.set(r, 0, shared + 0.6 * rng.normal());
            xa.set(r, 1, 0.4 * shared + rng.normal());
            xb.set(r, 0, 0.8 * shared + 0.7 * rng.normal());
            xb.set(r, 1, rng.normal() - 0.5 * shared);
        }
        (xa, xb)
    }

    fn sample_corr(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for (&a, &b) in x.iter().zip(y) {
            sxy += (a - mx) * (b - my);
            sxx += (a - mx) * (a - mx);
            syy += (b - my) * (b - my);
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn copied_group_has_unit_correlation() {
        let xa = noise_matrix(500, 2, 1);
        let xb = xa.clone();
        let result = pairwise_cca(&xa, &xb).unwrap();
        assert!((result.canonical_correlations[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn independent_groups_have_low_correlation() {
        let xa = noise_matrix(2000, 2, 2);
        let xb = noise_matrix(2000, 2, 3);
        let result = pairwise_cca(&xa, &xb).unwrap();
        assert!(
            result.canonical_correlations[0] < 0.15,
            "null correlation {}",
            result.canonical_correlations[0]
        );
    }

    #[test]
    fn matches_grid_search_maximum() {
        let (xa, xb) = coupled_groups(400, 4);
        let result = pairwise_cca(&xa, &xb).unwrap();
        let rho = result.canonical_correlations[0];
        // brute force over unit directions at angular resolution 0.01
        let steps = (core::f64::consts::PI / 0.01) as usize + 1;
        let cols_a = xa.column(0);
        let cols_a1 = xa.column(1);
        let cols_b = xb.column(0);
        let cols_b1 = xb.column(1);
        let mut best = 0.0f64;
        for ia in 0..steps {
            let ta = ia as f64 * 0.01;
            let (ca, sa) = (ta.cos(), ta.sin());
            let proj_a: Vec<f64> = cols_a
                .iter()
                .zip(&cols_a1)
                .map(|(&x, &y)| ca * x + sa * y)
                .collect();
            for ib in 0..steps {
                let tb = ib as f64 * 0.01;
                let (cb, sb) = (tb.cos(), tb.sin());
                let proj_b: Vec<f64> = cols_b
                    .iter()
                    .zip(&cols_b1)
                    .map(|(&x, &y)| cb * x + sb * y)
                    .collect();
                best = best.max(sample_corr(&proj_a, &proj_b).abs());
            }
        }
        assert!(
            (rho - best).abs() < 1e-3,
            "analytic {rho} vs grid {best}"
        );
        assert!(rho + 1e-9 >= best, "grid exceeded the claimed optimum");
    }

    #[test]
    fn unit_variance_under_group_covariance() {
        let (xa, xb) = coupled_groups(600, 5);
        let result = pairwise_cca(&xa, &xb).unwrap();
        let cols: Vec<usize> = vec![0, 1];
        let saa = cov_block(&xa, &cols, &cols);
        let sbb = cov_block(&xb, &cols, &cols);
        assert!((quad_form(&saa, &result.coefficients[0]) - 1.0).abs() < 1e-8);
        assert!((quad_form(&sbb, &result.coefficients[1]) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn scale_invariance_of_correlations() {
        let (xa, xb) = coupled_groups(500, 6);
        let base = pairwise_cca(&xa, &xb).unwrap();
        let mut scaled = xa.clone();
        for r in 0..scaled.rows {
            scaled.row_mut(r)[1] *= 37.5;
        }
        let result = pairwise_cca(&scaled, &xb).unwrap();
        assert!(
            (base.canonical_correlations[0] - result.canonical_correlations[0]).abs() < 1e-8
        );
    }

    #[test]
    fn dominates_single_variable_correlations() {
        let (xa, xb) = coupled_groups(500, 7);
        let rho = pairwise_cca(&xa, &xb).unwrap().canonical_correlations[0];
        for i in 0..2 {
            for j in 0..2 {
                let c = sample_corr(&xa.column(i), &xb.column(j)).abs();
                assert!(rho + 1e-8 >= c, "rho {rho} below single pair corr {c}");
            }
        }
    }

    #[test]
    fn mcca_matches_pairwise_for_two_groups() {
        let (xa, xb) = coupled_groups(800, 8);
        let pair = pairwise_cca(&xa, &xb).unwrap();
        let mut joined = Matrix::zeros(xa.rows, 4);
        for r in 0..xa.rows {
            joined.row_mut(r)[..2].copy_from_slice(xa.row(r));
            joined.row_mut(r)[2..].copy_from_slice(xb.row(r));
        }
        let panel = TimeSeriesPanel::from_values(joined).unwrap();
        let partition = GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let (_, mcca) = mcca_reduce(&panel, &partition).unwrap();
        assert!(
            (mcca.canonical_correlations[0].abs() - pair.canonical_correlations[0]).abs() < 1e-6,
            "mcca {} vs pairwise {}",
            mcca.canonical_correlations[0],
            pair.canonical_correlations[0]
        );
    }

    #[test]
    fn identical_copy_groups_reach_unit_correlation() {
        let base = noise_matrix(400, 2, 9);
        let mut joined = Matrix::zeros(400, 6);
        for r in 0..400 {
            for g in 0..3 {
                joined.row_mut(r)[2 * g..2 * g + 2].copy_from_slice(base.row(r));
            }
        }
        let panel = TimeSeriesPanel::from_values(joined).unwrap();
        let partition =
            GroupPartition::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]], 6).unwrap();
        let (_, result) = mcca_reduce(&panel, &partition).unwrap();
        for &c in &result.canonical_correlations {
            assert!((c - 1.0).abs() < 1e-6, "copy-group correlation {c}");
        }
    }

    #[test]
    fn independent_groups_stay_uncorrelated_in_mcca() {
        let values = noise_matrix(2000, 6, 10);
        let panel = TimeSeriesPanel::from_values(values).unwrap();
        let partition =
            GroupPartition::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]], 6).unwrap();
        let (_, result) = mcca_reduce(&panel, &partition).unwrap();
        for &c in &result.canonical_correlations {
            assert!(c.abs() < 0.15, "null canonical correlation {c}");
        }
    }

    #[test]
    fn var_recovers_known_coefficients() {
        let phi = [[0.5, 0.2, 0.0], [0.0, 0.4, 0.3], [0.1, 0.0, 0.6]];
        let mut rng = Prng::derive(11, &[23]);
        let t = 5000;
        let mut m = Matrix::zeros(t, 3);
        let mut prev = [0.0f64; 3];
        for r in 0..t {
            let mut cur = [0.0f64; 3];
            for i in 0..3 {
                cur[i] = rng.normal();
                for j in 0..3 {
                    cur[i] += phi[i][j] * prev[j];
                }
                m.set(r, i, cur[i]);
            }
            prev = cur;
        }
        let panel = TimeSeriesPanel::from_values(m).unwrap();
        let model = fit_var(&panel, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let est = model.coefficients[0].get(i, j);
                assert!(
                    (est - phi[i][j]).abs() < 0.05,
                    "phi[{i}][{j}] estimated {est}, truth {}",
                    phi[i][j]
                );
            }
        }
        assert_eq!(model.lag_order, 1);
        assert_eq!(model.residual_cov.rows, 3);
    }

    #[test]
    fn white_noise_coefficients_near_zero() {
        let panel = TimeSeriesPanel::from_values(noise_matrix(5000, 3, 12)).unwrap();
        let model = fit_var(&panel, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(model.coefficients[0].get(i, j).abs() < 0.1);
            }
        }
    }

    #[test]
    fn var_rejects_bad_inputs() {
        let panel = TimeSeriesPanel::from_values(noise_matrix(100, 2, 13)).unwrap();
        assert!(fit_var(&panel, 0).is_err());
        let short = TimeSeriesPanel::from_values(noise_matrix(12, 2, 14)).unwrap();
        assert!(fit_var(&short, 5).is_err());
    }

    #[test]
    fn granger_detects_lagged_copy() {
        let mut rng = Prng::derive(15, &[29]);
        let t = 300;
        let mut m = Matrix::zeros(t, 2);
        let mut prev = 0.0;
        for r in 0..t {
            let x = rng.normal();
            m.set(r, 0, x);
            m.set(r, 1, prev);
            prev = x;
        }
        let panel = TimeSeriesPanel::from_values(m).unwrap();
        let (f, p) = granger_test(&panel, 0, 1, 1).unwrap();
        assert!(f > 1e6, "noiseless copy should give a huge F, got {f}");
        assert!(p < 1e-12);
    }

    #[test]
    fn granger_power_on_var_coupling() {
        for seed in 0..5 {
            let mut rng = Prng::derive(100 + seed, &[31]);
            let t = 1000;
            let mut m = Matrix::zeros(t, 2);
            let mut prev = [0.0f64; 2];
            for r in 0..t {
                let x = 0.5 * prev[0] + rng.normal();
                let y = 0.5 * prev[0] + 0.3 * prev[1] + rng.normal();
                m.set(r, 0, x);
                m.set(r, 1, y);
                prev = [x, y];
            }
            let panel = TimeSeriesPanel::from_values(m).unwrap();
            let (_, p) = granger_test(&panel, 0, 1, 5).unwrap();
            assert!(p < 0.01, "seed {seed}: p = {p}");
        }
    }

    #[test]
    fn granger_null_calibration_smoke() {
        let mut rejections = 0;
        let reps = 200;
        for seed in 0..reps {
            let panel =
                TimeSeriesPanel::from_values(noise_matrix(300, 2, 1000 + seed)).unwrap();
            let (_, p) = granger_test(&panel, 0, 1, 5).unwrap();
            if p < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!(
            (0.01..=0.10).contains(&rate),
            "null rejection rate {rate} out of band"
        );
    }

    #[test]
    fn identical_copy_groups_keep_vgc_defined() {
        let base = noise_matrix(400, 2, 16);
        let mut joined = Matrix::zeros(400, 4);
        for r in 0..400 {
            joined.row_mut(r)[..2].copy_from_slice(base.row(r));
            joined.row_mut(r)[2..].copy_from_slice(base.row(r));
        }
        let panel = TimeSeriesPanel::from_values(joined).unwrap();
        let partition = GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let graph = mc_vgc_discover(&panel, &partition, 5, 0.05).unwrap();
        assert_eq!(graph.groups, 2);
    }

    #[test]
    fn baselines_are_deterministic() {
        let values = noise_matrix(600, 4, 18);
        let panel = TimeSeriesPanel::from_values(values).unwrap();
        let partition = GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let a = mc_vgc_discover(&panel, &partition, 5, 0.05).unwrap();
        let b = mc_vgc_discover(&panel, &partition, 5, 0.05).unwrap();
        assert_eq!(a, b);
        let mut config = DiscoveryConfig::default();
        config.forecaster.epochs = 5;
        config.forecaster.hidden = 8;
        let c = mc_cdmi_discover(&panel, &partition, &config).unwrap();
        let d = mc_cdmi_discover(&panel, &partition, &config).unwrap();
        assert_eq!(c, d);
    }
}
