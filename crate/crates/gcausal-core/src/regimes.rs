//! Regime identification by clustering sliding-window covariance matrices.
//!
//! Non-stationary series are segmented into locally stable phases: covariance
//! matrices over sliding windows are correlation-normalized, vectorized, and
//! clustered with k-means; a median filter enforces temporal contiguity and
//! label runs become time segments. Discovery can then run per segment.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::linalg::Matrix;
use crate::rng::Prng;

/// Tag for the k-means restart streams.
const KMEANS_TAG: u64 = 0x6b6d6e73;

/// A contiguous time span [start, end) assigned to one regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RegimeSegment {
    /// First time index covered by the segment.
    pub start: usize,
    /// One past the last time index covered by the segment.
    pub end: usize,
    /// Cluster id of the segment.
    pub regime: usize,
}

/// Output of [`cluster_regimes`]: per-window cluster ids plus the derived
/// time segmentation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegimeLabels {
    /// Sliding window length used to compute the clustered covariances.
    pub window_length: usize,
    /// Offset step between consecutive windows.
    pub stride: usize,
    /// One cluster id per window, after median smoothing.
    pub labels: Vec<usize>,
    /// Contiguous, ordered segments covering the labeled span.
    pub segments: Vec<RegimeSegment>,
    /// Mean silhouette of the smoothed labels in feature space; values below
    /// about 0.3 indicate a split not supported by the data.
    pub silhouette: f64,
}

/// Covariance matrices over sliding windows of `values`.
///
/// Window u covers rows [u·stride, u·stride + window_length); windows are
/// emitted while they fit. Requires window_length ≥ N + 1 so each covariance
/// has full rank in expectation.
pub fn windowed_covariances(
    values: &Matrix,
    window_length: usize,
    stride: usize,
) -> Result<Vec<Matrix>> {
    let (t, n) = (values.rows, values.cols);
    if n == 0 {
        return Err(CoreError::data("panel has no variables"));
    }
    if stride == 0 {
        return Err(CoreError::config("stride must be positive"));
    }
    if window_length < n + 1 {
        return Err(CoreError::config(format!(
            "window length {window_length} must be at least N + 1 = {}",
            n + 1
        )));
    }
    if window_length > t {
        return Err(CoreError::data(format!(
            "window length {window_length} exceeds panel length {t}"
        )));
    }
    let count = (t - window_length) / stride + 1;
    let mut covs = Vec::with_capacity(count);
    for u in 0..count {
        let offset = u * stride;
        let mut mean = vec![0.0; n];
        for r in offset..offset + window_length {
            for (m, &v) in mean.iter_mut().zip(values.row(r)) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= window_length as f64;
        }
        let mut cov = Matrix::zeros(n, n);
        for r in offset..offset + window_length {
            let row = values.row(r);
            for i in 0..n {
                let di = row[i] - mean[i];
                for j in i..n {
                    let dj = row[j] - mean[j];
                    let v = cov.get(i, j) + di * dj;
                    cov.set(i, j, v);
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                let v = cov.get(i, j) / window_length as f64;
                cov.set(i, j, v);
                cov.set(j, i, v);
            }
        }
        covs.push(cov);
    }
    Ok(covs)
}

/// Vectorized strict upper triangle of the correlation-normalized matrix.
fn correlation_features(cov: &Matrix) -> Result<Vec<f64>> {
    let n = cov.rows;
    let mut feats = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        if cov.get(i, i) <= 0.0 {
            return Err(CoreError::data(
                "window covariance has a non-positive variance; cannot normalize",
            ));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let denom = crate::fmath::sqrt(cov.get(i, i) * cov.get(j, j));
            feats.push(cov.get(i, j) / denom);
        }
    }
    Ok(feats)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// One k-means run: k-means++ seeding then Lloyd iterations until the
/// assignment is stable. Returns None when a cluster comes out empty.
fn kmeans_once(features: &[Vec<f64>], k: usize, rng: &mut Prng) -> Option<(Vec<usize>, f64)> {
    let l = features.len();
    let d = features[0].len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(features[rng.below(l)].clone());
    let mut best_d2 = vec![0.0; l];
    for (slot, f) in best_d2.iter_mut().zip(features) {
        *slot = sq_dist(f, &centers[0]);
    }
    for _ in 1..k {
        let total: f64 = best_d2.iter().sum();
        let next = if total > 0.0 {
            // sample index with probability proportional to squared distance
            let mut target = rng.uniform() * total;
            let mut chosen = l - 1;
            for (idx, &w) in best_d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = idx;
                    break;
                }
            }
            chosen
        } else {
            rng.below(l)
        };
        centers.push(features[next].clone());
        for (slot, f) in best_d2.iter_mut().zip(features) {
            let dist = sq_dist(f, centers.last().unwrap());
            if dist < *slot {
                *slot = dist;
            }
        }
    }
    let mut labels = vec![0usize; l];
    for _ in 0..100 {
        let mut changed = false;
        for (idx, f) in features.iter().enumerate() {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let dist = sq_dist(f, center);
                if dist < best_dist {
                    best_dist = dist;
                    best = c;
                }
            }
            if labels[idx] != best {
                labels[idx] = best;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        for &lab in &labels {
            counts[lab] += 1;
        }
        if counts.contains(&0) {
            return None;
        }
        for center in centers.iter_mut() {
            for v in center.iter_mut() {
                *v = 0.0;
            }
        }
        for (f, &lab) in features.iter().zip(&labels) {
            for (c, &v) in centers[lab].iter_mut().zip(f) {
                *c += v;
            }
        }
        for (center, &count) in centers.iter_mut().zip(&counts) {
            for v in center.iter_mut() {
                *v /= count as f64;
            }
        }
        if !changed {
            break;
        }
    }
    let mut inertia = 0.0;
    for (f, &lab) in features.iter().zip(&labels) {
        inertia += sq_dist(f, &centers[lab]);
    }
    let _ = d;
    Some((labels, inertia))
}

/// Median filter over discrete labels; window edges are clipped.
fn median_smooth(labels: &[usize], width: usize) -> Vec<usize> {
    if width <= 1 {
        return labels.to_vec();
    }
    let half = width / 2;
    let l = labels.len();
    let mut out = Vec::with_capacity(l);
    let mut buf = Vec::with_capacity(width);
    for i in 0..l {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(l);
        buf.clear();
        buf.extend_from_slice(&labels[lo..hi]);
        buf.sort_unstable();
        out.push(buf[buf.len() / 2]);
    }
    out
}

/// Label runs mapped to time segments. Boundaries between runs fall at the
/// next run's window offset; the final segment extends to the end of the
/// last window so the segments tile the labeled span exactly.
fn segments_from_labels(
    labels: &[usize],
    window_length: usize,
    stride: usize,
) -> Vec<RegimeSegment> {
    let mut segments = Vec::new();
    if labels.is_empty() {
        return segments;
    }
    let span_end = (labels.len() - 1) * stride + window_length;
    let mut run_start = 0usize;
    for u in 1..=labels.len() {
        if u == labels.len() || labels[u] != labels[run_start] {
            let start = if run_start == 0 { 0 } else { run_start * stride };
            let end = if u == labels.len() { span_end } else { u * stride };
            segments.push(RegimeSegment {
                start,
                end,
                regime: labels[run_start],
            });
            run_start = u;
        }
    }
    segments
}

/// Mean silhouette of `labels` over `features`; 0 when fewer than two
/// clusters survive or a point's cluster is a singleton.
fn silhouette(features: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let l = features.len();
    let mut counts = vec![0usize; k];
    for &lab in labels {
        counts[lab] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..l {
        let own = labels[i];
        if counts[own] <= 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..l {
            if i == j {
                continue;
            }
            sums[labels[j]] += crate::fmath::sqrt(sq_dist(&features[i], &features[j]));
        }
        let a = sums[own] / (counts[own] - 1) as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c != own && counts[c] > 0 {
                b = b.min(sums[c] / counts[c] as f64);
            }
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / l as f64
}

/// Cluster windowed covariances into `k` regimes.
///
/// Each covariance is correlation-normalized and its strict upper triangle
/// vectorized, so the clustering responds to dependence-structure change
/// rather than marginal scale. k-means runs with 10 seeded restarts keeping
/// the best inertia; a restart that converges with an empty cluster is
/// retried, and more than 10 such failures is an error. Labels are median
/// filtered with `smoothing_width` (odd) and label runs become segments.
/// `window_length` and `stride` must match the values used to build `covs`.
pub fn cluster_regimes(
    covs: &[Matrix],
    k: usize,
    smoothing_width: usize,
    window_length: usize,
    stride: usize,
    seed: u64,
) -> Result<RegimeLabels> {
    if k < 2 {
        return Err(CoreError::config("need at least 2 regimes"));
    }
    if covs.len() < k {
        return Err(CoreError::data(format!(
            "{} windows cannot support {k} regimes",
            covs.len()
        )));
    }
    if smoothing_width.is_multiple_of(2) {
        return Err(CoreError::config("smoothing width must be odd"));
    }
    if stride == 0 || window_length == 0 {
        return Err(CoreError::config("window length and stride must be positive"));
    }
    let n = covs[0].rows;
    if n < 2 {
        return Err(CoreError::data(
            "regime clustering needs at least 2 variables",
        ));
    }
    let mut features = Vec::with_capacity(covs.len());
    for cov in covs {
        if cov.rows != n || cov.cols != n {
            return Err(CoreError::data("covariance matrices differ in shape"));
        }
        features.push(correlation_features(cov)?);
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut successes = 0usize;
    let mut failures = 0usize;
    let mut attempt = 0u64;
    while successes < 10 {
        let mut rng = Prng::derive(seed, &[KMEANS_TAG, attempt]);
        attempt += 1;
        match kmeans_once(&features, k, &mut rng) {
            Some((labels, inertia)) => {
                successes += 1;
                let better = match &best {
                    None => true,
                    Some((_, best_inertia)) => inertia < *best_inertia,
                };
                if better {
                    best = Some((labels, inertia));
                }
            }
            None => {
                failures += 1;
                if failures >= 10 {
                    return Err(CoreError::numeric(
                        "k-means produced an empty cluster in 10 consecutive restarts",
                    ));
                }
            }
        }
    }
    let (raw_labels, _) = best.expect("at least one k-means restart succeeded");
    let labels = median_smooth(&raw_labels, smoothing_width);
    let segments = segments_from_labels(&labels, window_length, stride);
    let score = silhouette(&features, &labels, k);
    Ok(RegimeLabels {
        window_length,
        stride,
        labels,
        segments,
        silhouette: score,
    })
}

/// Convenience wrapper: windowed covariances followed by clustering.
pub fn identify_regimes(
    values: &Matrix,
    window_length: usize,
    stride: usize,
    k: usize,
    smoothing_width: usize,
    seed: u64,
) -> Result<RegimeLabels> {
    let covs = windowed_covariances(values, window_length, stride)?;
    cluster_regimes(&covs, k, smoothing_width, window_length, stride, seed)
}
