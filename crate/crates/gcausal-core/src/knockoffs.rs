//! Second-order Gaussian knockoffs used as in-distribution interventions.
//!
//! A knockoff panel Z~ preserves the first two moments of the source panel
//! (including its covariance structure) while each column decouples from its
//! original: the target joint second moment of (Z, Z~) on the correlation
//! scale is [[R, R - D], [R - D, R]] with D = diag(s). Substituting a
//! group's columns with their knockoffs therefore severs that group's causal
//! influence without moving the data off-distribution.
//!
//! Construction: equicorrelated s rule, s_j = min(2 lambda_min(R), 1), with
//! rows treated as exchangeable draws from the stationary marginal. Knockoff
//! columns do not reproduce within-column autocorrelation; this is a known
//! limitation of the second-order construction on time series.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fmath;
use crate::linalg::{psd_repair, psd_sqrt, spd_inverse, sym_eigen, Matrix};
use crate::rng::Prng;

const NOISE_TAG: u64 = 0x6b6e6f63;
const SWEEP_TAG: u64 = 0x73776565;

/// First and second moments of a panel, with the shrunk covariance repaired
/// to eigenvalues >= 1e-8 and its induced correlation.
#[derive(Debug, Clone)]
pub struct MomentEstimate {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    pub correlation: Matrix,
}

/// Knockoff copies aligned row-wise with the source panel, plus the s vector
/// used to build them.
#[derive(Debug, Clone)]
pub struct KnockoffPanel {
    pub values: Matrix,
    pub s: Vec<f64>,
}

/// Moment-diagnostic report comparing a panel with its knockoffs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KnockoffDiagnostics {
    /// max elementwise |Cov(Z~) - Cov(Z)|.
    pub cov_match_error: f64,
    /// mean_j |corr(Z_j, Z~_j)|; near 1 - s_j for faithful knockoffs.
    pub mean_self_corr: f64,
    /// max elementwise |Cov(Z, Z~) - (Cov(Z) - D_cov)| where D_cov is s
    /// rescaled to covariance units.
    pub cross_block_error: f64,
}

/// One row of the dimensionality sweep.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub dim: usize,
    pub mean_self_corr: f64,
}

/// Sample mean and shrunk covariance: cov = (1 - gamma) S + gamma diag(S)
/// where S is the sample covariance (population convention). The result is
/// eigenvalue-clipped to be positive definite, and the correlation matrix is
/// derived from the repaired covariance (congruence keeps it PSD).
pub fn estimate_moments(values: &Matrix, shrinkage: f64) -> Result<MomentEstimate> {
    if !(0.0..1.0).contains(&shrinkage) {
        return Err(CoreError::config(format!(
            "shrinkage must lie in [0, 1), got {shrinkage}"
        )));
    }
    let (t, n) = (values.rows, values.cols);
    if t < 2 {
        return Err(CoreError::data("moment estimation needs at least 2 rows"));
    }
    let mut mean = alloc::vec![0.0; n];
    for r in 0..t {
        for (c, m) in mean.iter_mut().enumerate() {
            *m += values.get(r, c);
        }
    }
    for m in mean.iter_mut() {
        *m /= t as f64;
    }
    let mut cov = Matrix::zeros(n, n);
    for r in 0..t {
        let row = values.row(r);
        for i in 0..n {
            let di = row[i] - mean[i];
            for j in i..n {
                let v = cov.get(i, j) + di * (row[j] - mean[j]);
                cov.set(i, j, v);
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            let v = cov.get(i, j) / t as f64;
            let v = if i == j { v } else { (1.0 - shrinkage) * v };
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    for j in 0..n {
        if cov.get(j, j) <= 1e-12 {
            return Err(CoreError::data(format!(
                "column {j} has (near) zero variance; knockoffs undefined"
            )));
        }
    }
    let cov = psd_repair(&cov, 1e-8)?;
    let d: Vec<f64> = (0..n).map(|j| fmath::sqrt(cov.get(j, j))).collect();
    let mut corr = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            corr.set(i, j, cov.get(i, j) / (d[i] * d[j]));
        }
    }
    Ok(MomentEstimate {
        mean,
        covariance: cov,
        correlation: corr,
    })
}

/// Equicorrelated knockoff coefficients: s_j = min(2 lambda_min(R), 1),
/// identical across j. This is the largest uniform s keeping the extended
/// matrix [[R, R - D], [R - D, R]] positive semi-definite.
pub fn equicorrelated_s(correlation: &Matrix) -> Result<Vec<f64>> {
    let n = correlation.rows;
    if correlation.cols != n {
        return Err(CoreError::data("correlation matrix must be square"));
    }
    for j in 0..n {
        if fmath::abs(correlation.get(j, j) - 1.0) > 1e-8 {
            return Err(CoreError::data(format!(
                "correlation diagonal entry {j} is {}, expected 1",
                correlation.get(j, j)
            )));
        }
    }
    let eigen = sym_eigen(correlation)?;
    let lambda_min = eigen.values[0];
    let s = (2.0 * lambda_min).min(1.0);
    Ok(alloc::vec![s; n])
}

/// Sample the knockoff panel. On the correlation scale (center by the
/// estimated mean, divide by the estimated standard deviations) each row is
///
///   u~ = u (I - R^-1 D) + e,   e ~ Normal(0, V),  V = 2D - D R^-1 D
///
/// with D = diag(s) and V eigenvalue-repaired if needed. Rows of the noise
/// are i.i.d. Deterministic given the seed.
pub fn sample_knockoffs(
    values: &Matrix,
    moments: &MomentEstimate,
    s: &[f64],
    seed: u64,
) -> Result<KnockoffPanel> {
    let (t, n) = (values.rows, values.cols);
    if moments.mean.len() != n || moments.correlation.rows != n {
        return Err(CoreError::data("moment estimate does not match panel width"));
    }
    if s.len() != n {
        return Err(CoreError::data("s vector length does not match panel width"));
    }
    if s.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
        return Err(CoreError::data("s entries must lie in (0, 1]"));
    }
    let r_inv = spd_inverse(&moments.correlation)
        .map_err(|_| CoreError::numeric("correlation matrix is singular after shrinkage"))?;
    // A = I - R^-1 D (scale columns of R^-1 by s)
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = -r_inv.get(i, j) * s[j];
            a.set(i, j, if i == j { 1.0 + v } else { v });
        }
    }
    // V = 2D - D R^-1 D
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let base = -s[i] * r_inv.get(i, j) * s[j];
            v.set(i, j, if i == j { 2.0 * s[i] + base } else { base });
        }
    }
    let v = psd_repair(&v, 1e-8)
        .map_err(|_| CoreError::numeric("knockoff noise covariance is not repairable"))?;
    let v_sqrt = psd_sqrt(&v)?;
    let d: Vec<f64> = (0..n)
        .map(|j| fmath::sqrt(moments.covariance.get(j, j)))
        .collect();

    let mut rng = Prng::derive(seed, &[NOISE_TAG]);
    let mut out = Matrix::zeros(t, n);
    let mut u = alloc::vec![0.0; n];
    let mut noise = alloc::vec![0.0; n];
    for row in 0..t {
        let src = values.row(row);
        for j in 0..n {
            u[j] = (src[j] - moments.mean[j]) / d[j];
        }
        for g in noise.iter_mut() {
            *g = rng.normal();
        }
        let dst = out.row_mut(row);
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                // u A + e V^(1/2), both contracted over the first index
                acc += u[k] * a.get(k, j) + noise[k] * v_sqrt.get(k, j);
            }
            dst[j] = moments.mean[j] + acc * d[j];
        }
    }
    if !out.is_finite() {
        return Err(CoreError::numeric("knockoff sample contains non-finite values"));
    }
    Ok(KnockoffPanel {
        values: out,
        s: s.to_vec(),
    })
}

fn sample_cov(x: &Matrix, y: &Matrix) -> Matrix {
    let (t, n) = (x.rows, x.cols);
    let m = y.cols;
    let mut mx = alloc::vec![0.0; n];
    let mut my = alloc::vec![0.0; m];
    for r in 0..t {
        for (c, v) in mx.iter_mut().enumerate() {
            *v += x.get(r, c);
        }
        for (c, v) in my.iter_mut().enumerate() {
            *v += y.get(r, c);
        }
    }
    for v in mx.iter_mut() {
        *v /= t as f64;
    }
    for v in my.iter_mut() {
        *v /= t as f64;
    }
    let mut cov = Matrix::zeros(n, m);
    for r in 0..t {
        for i in 0..n {
            let di = x.get(r, i) - mx[i];
            for j in 0..m {
                let v = cov.get(i, j) + di * (y.get(r, j) - my[j]);
                cov.set(i, j, v);
            }
        }
    }
    cov.scale(1.0 / t as f64)
}

/// Moment diagnostics between a panel and its knockoffs; see
/// [`KnockoffDiagnostics`] for the three error summaries.
pub fn diagnostics(values: &Matrix, knockoffs: &KnockoffPanel) -> Result<KnockoffDiagnostics> {
    if values.rows != knockoffs.values.rows || values.cols != knockoffs.values.cols {
        return Err(CoreError::data("knockoff panel shape does not match source"));
    }
    let n = values.cols;
    let cov_z = sample_cov(values, values);
    let cov_k = sample_cov(&knockoffs.values, &knockoffs.values);
    let cross = sample_cov(values, &knockoffs.values);
    let mut cov_match_error = 0.0f64;
    let mut cross_block_error = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            cov_match_error = cov_match_error.max(fmath::abs(cov_k.get(i, j) - cov_z.get(i, j)));
            let target = cov_z.get(i, j)
                - if i == j {
                    knockoffs.s[i] * cov_z.get(i, i)
                } else {
                    0.0
                };
            cross_block_error = cross_block_error.max(fmath::abs(cross.get(i, j) - target));
        }
    }
    let mut self_corr_sum = 0.0;
    for j in 0..n {
        let denom = fmath::sqrt(cov_z.get(j, j) * cov_k.get(j, j));
        // zero-variance columns contribute zero correlation
        if denom > 0.0 {
            self_corr_sum += fmath::abs(cross.get(j, j) / denom);
        }
    }
    Ok(KnockoffDiagnostics {
        cov_match_error,
        mean_self_corr: self_corr_sum / n as f64,
        cross_block_error,
    })
}

/// Self-correlation versus dimensionality on equicorrelated Gaussian panels
/// (pairwise correlation `rho`, T = 500 rows, shrinkage 0.1). The knockoff
/// decoupling guarantee weakens as N grows because the estimated minimum
/// eigenvalue, and with it s, shrinks; this sweep quantifies that.
pub fn dimension_sweep(
    dims: &[usize],
    trials: usize,
    rho: f64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if dims.is_empty() {
        return Err(CoreError::config("dimension sweep needs at least one dimension"));
    }
    if dims.iter().any(|&d| d < 2) {
        return Err(CoreError::config("dimension sweep dimensions must be >= 2"));
    }
    if trials == 0 {
        return Err(CoreError::config("dimension sweep needs at least one trial"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(CoreError::config("rho must lie in [0, 1)"));
    }
    const T: usize = 500;
    let mut rows = Vec::with_capacity(dims.len());
    for (di, &dim) in dims.iter().enumerate() {
        let mut total = 0.0;
        for trial in 0..trials {
            let mut rng = Prng::derive(seed, &[SWEEP_TAG, di as u64, trial as u64]);
            let mut panel = Matrix::zeros(T, dim);
            let shared = fmath::sqrt(rho);
            let own = fmath::sqrt(1.0 - rho);
            for r in 0..T {
                let g = rng.normal();
                let row = panel.row_mut(r);
                for v in row.iter_mut() {
                    *v = shared * g + own * rng.normal();
                }
            }
            let moments = estimate_moments(&panel, 0.1)?;
            let s = equicorrelated_s(&moments.correlation)?;
            let noise_seed = crate::rng::mix_seed(seed, &[SWEEP_TAG, di as u64, trial as u64, 1]);
            let knock = sample_knockoffs(&panel, &moments, &s, noise_seed)?;
            total += diagnostics(&panel, &knock)?.mean_self_corr;
        }
        rows.push(SweepRow {
            dim,
            mean_self_corr: total / trials as f64,
        });
    }
    Ok(rows)
}
