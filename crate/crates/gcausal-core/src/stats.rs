//! Two-sample invariance tests and the supporting special functions.
//!
//! Six test kinds compare observational and interventional residual
//! samples. KS, MWU, WSR, and Welch use standard asymptotic p-values;
//! Cramér-von Mises and Anderson-Darling use seeded permutation p-values
//! (199 permutations, add-one rule), which are exact-level by construction
//! and need no critical-value tables.
//!
//! Tie handling follows exact float equality throughout (as rank-based
//! references do); residual data is effectively continuous, so ties only
//! arise in degenerate inputs, where every test falls back to p = 1.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fmath;
use crate::rng::Prng;

const SQRT_2: f64 = core::f64::consts::SQRT_2;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Upper tail of the standard normal: P(Z > z).
pub fn normal_sf(z: f64) -> f64 {
    0.5 * fmath::erfc(z / SQRT_2)
}

fn ln_beta(a: f64, b: f64) -> f64 {
    fmath::lgamma(a) + fmath::lgamma(b) - fmath::lgamma(a + b)
}

/// Continued fraction for the incomplete beta (modified Lentz method).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fmath::abs(d) < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fmath::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if fmath::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fmath::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if fmath::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fmath::abs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn betainc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let bt = fmath::exp(a * fmath::ln(x) + b * fmath::ln_1p(-x) - ln_beta(a, b));
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * betacf(a, b, x) / a
    } else {
        1.0 - bt * betacf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of a Student-t statistic with (possibly fractional)
/// degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    betainc(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Upper tail of the F distribution: P(F_{d1,d2} > f).
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    betainc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f)).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Test battery
// ---------------------------------------------------------------------------

/// Available two-sample tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Ks,
    Mwu,
    Cvm,
    Wsr,
    Welch,
    Ad,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::Ks,
        TestKind::Mwu,
        TestKind::Cvm,
        TestKind::Wsr,
        TestKind::Welch,
        TestKind::Ad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Ks => "ks",
            TestKind::Mwu => "mwu",
            TestKind::Cvm => "cvm",
            TestKind::Wsr => "wsr",
            TestKind::Welch => "welch",
            TestKind::Ad => "ad",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ks" => Ok(TestKind::Ks),
            "mwu" => Ok(TestKind::Mwu),
            "cvm" => Ok(TestKind::Cvm),
            "wsr" => Ok(TestKind::Wsr),
            "welch" => Ok(TestKind::Welch),
            "ad" => Ok(TestKind::Ad),
            other => Err(CoreError::config(format!(
                "unknown test kind '{other}' (expected ks|mwu|cvm|wsr|welch|ad)"
            ))),
        }
    }
}

/// Result of one two-sample comparison.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TestOutcome {
    pub kind: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// Distribution shift detected at level alpha (strict inequality, so
/// p = alpha does not reject).
pub fn decide(outcome: &TestOutcome, alpha: f64) -> bool {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    outcome.p_value < alpha
}

/// Run the chosen test. `seed` only feeds the permutation tests (CVM, AD);
/// the asymptotic tests ignore it.
pub fn two_sample_test(kind: TestKind, a: &[f64], b: &[f64], seed: u64) -> Result<TestOutcome> {
    if a.len() < 5 || b.len() < 5 {
        return Err(CoreError::data(format!(
            "{} test needs at least 5 samples per side, got {} and {}",
            kind.name(),
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(CoreError::data("test samples contain non-finite values"));
    }
    let (statistic, p_value) = match kind {
        TestKind::Ks => ks_test(a, b),
        TestKind::Mwu => mwu_test(a, b),
        TestKind::Cvm => permutation_test(a, b, seed, cvm_statistic),
        TestKind::Ad => permutation_test(a, b, seed, ad_statistic),
        TestKind::Wsr => wsr_test(a, b)?,
        TestKind::Welch => welch_test(a, b),
    };
    Ok(TestOutcome {
        kind,
        statistic,
        p_value: p_value.clamp(0.0, 1.0),
        n_a: a.len(),
        n_b: b.len(),
    })
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

// --- Kolmogorov-Smirnov ----------------------------------------------------

/// Scaled statistic C = sqrt(pq/(p+q)) · sup|F̂_a − F̂_b| with its
/// asymptotic p-value 2·Σ_{k≥1}(−1)^{k−1}·exp(−2k²C²).
fn ks_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    let xs = sorted_copy(a);
    let ys = sorted_copy(b);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d_max = 0.0f64;
    while i < n || j < m {
        let v = if i < n && (j >= m || xs[i] <= ys[j]) {
            xs[i]
        } else {
            ys[j]
        };
        while i < n && xs[i] == v {
            i += 1;
        }
        while j < m && ys[j] == v {
            j += 1;
        }
        let diff = fmath::abs(i as f64 / n as f64 - j as f64 / m as f64);
        d_max = d_max.max(diff);
    }
    let c = d_max * fmath::sqrt((n * m) as f64 / (n + m) as f64);
    (c, ks_series_p(c))
}

/// Kolmogorov asymptotic series, truncated once a term drops below 1e-12.
fn ks_series_p(c: f64) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut k = 1u32;
    loop {
        let term = fmath::exp(-2.0 * (k as f64) * (k as f64) * c * c);
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
        k += 1;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

// --- rank helpers ------------------------------------------------------------

/// Midranks (1-based, ties averaged) of an ascending-sorted slice, plus the
/// tie-group sizes.
fn midranks(sorted: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = sorted.len();
    let mut ranks = vec![0.0; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let avg = ((i + 1) + j) as f64 / 2.0;
        for r in ranks.iter_mut().take(j).skip(i) {
            *r = avg;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

// --- Mann-Whitney U ----------------------------------------------------------

/// Midrank U statistic with tie-corrected variance and continuity
/// correction; two-sided normal approximation.
fn mwu_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (n_a, n_b) = (a.len(), b.len());
    let n = n_a + n_b;
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));
    let values: Vec<f64> = pooled.iter().map(|p| p.0).collect();
    let (ranks, ties) = midranks(&values);
    let rank_sum_a: f64 = pooled
        .iter()
        .zip(&ranks)
        .filter(|(p, _)| p.1)
        .map(|(_, &r)| r)
        .sum();
    let u = rank_sum_a - (n_a * (n_a + 1)) as f64 / 2.0;
    let mu = (n_a * n_b) as f64 / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = (n_a * n_b) as f64 / 12.0
        * ((n + 1) as f64 - tie_term / (n as f64 * (n - 1) as f64));
    if var <= 0.0 {
        return (u, 1.0);
    }
    let diff = u - mu;
    let corrected = if diff > 0.0 {
        diff - 0.5
    } else if diff < 0.0 {
        diff + 0.5
    } else {
        0.0
    };
    let z = corrected / fmath::sqrt(var);
    (u, (2.0 * normal_sf(fmath::abs(z))).min(1.0))
}

// --- permutation tests (CVM, AD) ---------------------------------------------

/// Cramér-von Mises two-sample statistic
/// T = nm/(n+m)² · Σ over pooled sample points of (F̂_a − F̂_b)².
/// Expects ascending-sorted inputs.
fn cvm_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let (n, m) = (xs.len(), ys.len());
    let total = n + m;
    let mut pooled: Vec<f64> = Vec::with_capacity(total);
    pooled.extend_from_slice(xs);
    pooled.extend_from_slice(ys);
    pooled.sort_unstable_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sum = 0.0;
    for &v in &pooled {
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        let diff = i as f64 / n as f64 - j as f64 / m as f64;
        sum += diff * diff;
    }
    (n * m) as f64 / ((total * total) as f64) * sum
}

/// Anderson-Darling two-sample statistic (Scholz-Stephens k = 2 rank form,
/// right-continuous counts). Expects ascending-sorted inputs.
fn ad_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let (n, m) = (xs.len(), ys.len());
    let total = n + m;
    let mut pooled: Vec<f64> = Vec::with_capacity(total);
    pooled.extend_from_slice(xs);
    pooled.extend_from_slice(ys);
    pooled.sort_unstable_by(f64::total_cmp);
    let mut m_a = 0usize;
    let mut m_b = 0usize;
    let mut sum = 0.0;
    for j in 1..total {
        let v = pooled[j - 1];
        while m_a < n && xs[m_a] <= v {
            m_a += 1;
        }
        while m_b < m && ys[m_b] <= v {
            m_b += 1;
        }
        let denom = (j * (total - j)) as f64;
        let da = (total * m_a) as f64 - (j * n) as f64;
        let db = (total * m_b) as f64 - (j * m) as f64;
        sum += (da * da / n as f64 + db * db / m as f64) / denom;
    }
    sum / total as f64
}

/// Seeded permutation p-value over 199 shuffles of the pooled sample with
/// the add-one rule: p = (1 + #{perm ≥ observed}) / 200, never exactly 0.
///
/// The pool is sorted and always split at min(n_a, n_b), so swapping the
/// two input samples reproduces the identical permutation sequence and
/// p-value (both statistics are symmetric in their arguments).
fn permutation_test(a: &[f64], b: &[f64], seed: u64, stat: fn(&[f64], &[f64]) -> f64) -> (f64, f64) {
    const PERMUTATIONS: usize = 199;
    let xs = sorted_copy(a);
    let ys = sorted_copy(b);
    let observed = stat(&xs, &ys);
    let n_min = xs.len().min(ys.len());
    let mut pool: Vec<f64> = Vec::with_capacity(xs.len() + ys.len());
    pool.extend_from_slice(&xs);
    pool.extend_from_slice(&ys);
    pool.sort_unstable_by(f64::total_cmp);
    let mut rng = Prng::derive(seed, &[0x7065726d]);
    let mut exceed = 0usize;
    for _ in 0..PERMUTATIONS {
        let mut shuffled = pool.clone();
        rng.shuffle(&mut shuffled);
        let mut x: Vec<f64> = shuffled[..n_min].to_vec();
        let mut y: Vec<f64> = shuffled[n_min..].to_vec();
        x.sort_unstable_by(f64::total_cmp);
        y.sort_unstable_by(f64::total_cmp);
        if stat(&x, &y) >= observed {
            exceed += 1;
        }
    }
    (observed, (1 + exceed) as f64 / (1 + PERMUTATIONS) as f64)
}

// --- Wilcoxon signed-rank ------------------------------------------------------

/// Paired by index; zero differences dropped; normal approximation with tie
/// correction and continuity correction. Statistic is min(W+, W−).
fn wsr_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(CoreError::data(format!(
            "wsr test requires equal sample sizes (paired by window), got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x - y)
        .filter(|&d| d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok((0.0, 1.0));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&i, &j| fmath::abs(diffs[i]).total_cmp(&fmath::abs(diffs[j])));
    let sorted_abs: Vec<f64> = order.iter().map(|&i| fmath::abs(diffs[i])).collect();
    let (ranks, ties) = midranks(&sorted_abs);
    let mut w_plus = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        if diffs[i] > 0.0 {
            w_plus += ranks[pos];
        }
    }
    let total = (n * (n + 1)) as f64 / 2.0;
    let w = w_plus.min(total - w_plus);
    let mu = total / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = (n * (n + 1) * (2 * n + 1)) as f64 / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return Ok((w, 1.0));
    }
    let diff = w - mu;
    let corrected = if diff > 0.0 {
        diff - 0.5
    } else if diff < 0.0 {
        diff + 0.5
    } else {
        0.0
    };
    let z = corrected / fmath::sqrt(var);
    Ok((w, (2.0 * normal_sf(fmath::abs(z))).min(1.0)))
}

// --- Welch's t -------------------------------------------------------------------

/// Welch's unequal-variance t test with Welch-Satterthwaite degrees of
/// freedom. Variances use the n−1 convention, matching the test's standard
/// definition (the crate-wide n convention applies to panel statistics).
fn welch_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (n_a, n_b) = (a.len() as f64, b.len() as f64);
    let mean_a: f64 = a.iter().sum::<f64>() / n_a;
    let mean_b: f64 = b.iter().sum::<f64>() / n_b;
    let var_a: f64 = a.iter().map(|&v| (v - mean_a) * (v - mean_a)).sum::<f64>() / (n_a - 1.0);
    let var_b: f64 = b.iter().map(|&v| (v - mean_b) * (v - mean_b)).sum::<f64>() / (n_b - 1.0);
    let se2 = var_a / n_a + var_b / n_b;
    if se2 <= 0.0 {
        // Both samples constant: equal means are a perfect null, unequal
        // means an unambiguous shift.
        return if mean_a == mean_b {
            (0.0, 1.0)
        } else if mean_a > mean_b {
            (f64::MAX, 0.0)
        } else {
            (-f64::MAX, 0.0)
        };
    }
    let t = (mean_a - mean_b) / fmath::sqrt(se2);
    let df = se2 * se2
        / ((var_a / n_a) * (var_a / n_a) / (n_a - 1.0)
            + (var_b / n_b) * (var_b / n_b) / (n_b - 1.0));
    (t, student_t_two_sided(fmath::abs(t), df))
}

// ---------------------------------------------------------------------------
// Sensitivity study
// ---------------------------------------------------------------------------

/// Perturbations applied to the second sample in [`sensitivity_study`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Control column: b ~ Normal(0, 1), same as a.
    None,
    /// b ~ Normal(0.5, 1).
    MeanShift,
    /// b ~ Normal(0, 2) (variance doubled).
    VarScale,
    /// b ~ Normal(0.5, 2).
    Both,
    /// b ~ Normal(0, 1) with half the sample size.
    HalfN,
}

impl Perturbation {
    pub const ALL: [Perturbation; 5] = [
        Perturbation::None,
        Perturbation::MeanShift,
        Perturbation::VarScale,
        Perturbation::Both,
        Perturbation::HalfN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Perturbation::None => "none",
            Perturbation::MeanShift => "mean+0.5",
            Perturbation::VarScale => "var*2",
            Perturbation::Both => "both",
            Perturbation::HalfN => "half-n",
        }
    }
}

/// One cell of the power table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerRow {
    pub test: TestKind,
    pub perturbation: Perturbation,
    pub n: usize,
    /// Fraction of repetitions rejecting at alpha = 0.05; NaN where the test
    /// is undefined (WSR requires paired samples, so half-n does not apply).
    pub power: f64,
}

/// Detection-rate table per test × perturbation at alpha = 0.05.
pub fn sensitivity_study(n: usize, repetitions: usize, seed: u64) -> Result<Vec<PowerRow>> {
    if n < 20 {
        return Err(CoreError::config("sensitivity_study requires n >= 20"));
    }
    if repetitions < 100 {
        return Err(CoreError::config("sensitivity_study requires >= 100 repetitions"));
    }
    const ALPHA: f64 = 0.05;
    let mut rejections = [[0usize; Perturbation::ALL.len()]; TestKind::ALL.len()];
    for rep in 0..repetitions {
        let mut rng = Prng::derive(seed, &[0x73656e73, rep as u64]);
        let a: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        for (pi, &pert) in Perturbation::ALL.iter().enumerate() {
            let (len, mean, std) = match pert {
                Perturbation::None => (n, 0.0, 1.0),
                Perturbation::MeanShift => (n, 0.5, 1.0),
                Perturbation::VarScale => (n, 0.0, SQRT_2),
                Perturbation::Both => (n, 0.5, SQRT_2),
                Perturbation::HalfN => (n / 2, 0.0, 1.0),
            };
            let b: Vec<f64> = (0..len).map(|_| rng.normal_scaled(mean, std)).collect();
            for (ti, &kind) in TestKind::ALL.iter().enumerate() {
                if kind == TestKind::Wsr && pert == Perturbation::HalfN {
                    continue; // undefined cell, reported as NaN below
                }
                let test_seed =
                    crate::rng::mix_seed(seed, &[rep as u64, pi as u64, ti as u64]);
                let outcome = two_sample_test(kind, &a, &b, test_seed)?;
                if decide(&outcome, ALPHA) {
                    rejections[ti][pi] += 1;
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (ti, &kind) in TestKind::ALL.iter().enumerate() {
        for (pi, &pert) in Perturbation::ALL.iter().enumerate() {
            let power = if kind == TestKind::Wsr && pert == Perturbation::HalfN {
                f64::NAN
            } else {
                rejections[ti][pi] as f64 / repetitions as f64
            };
            rows.push(PowerRow {
                test: kind,
                perturbation: pert,
                n,
                power,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
// Oracle constants keep their full decimal expansions as computed.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // Shared oracle vectors; expected values frozen from reference
    // implementations (scipy for the asymptotic tests, direct independent
    // codings of the literature formulas elsewhere).
    const A: [f64; 8] = [0.8, 1.9, 2.4, 3.1, 4.5, 5.2, 6.6, 7.3];
    const B: [f64; 8] = [1.2, 2.2, 3.3, 4.1, 5.5, 6.1, 7.7, 8.9];

    fn close(a: f64, b: f64, tol: f64) -> bool {
        fmath::abs(a - b) <= tol
    }

    #[test]
    fn special_functions_match_references() {
        assert!(close(betainc(0.5, 0.5, 0.3), 0.36901011956554536, 1e-12));
        assert!(close(betainc(2.0, 3.0, 0.7), 0.9163, 1e-12));
        assert!(close(betainc(5.5, 0.5, 0.9), 0.29251845539577315, 1e-12));
        assert!(close(betainc(30.0, 30.0, 0.45), 0.2196671844526262, 1e-12));
        assert!(close(betainc(1.0, 1.0, 0.5), 0.5, 1e-12));
        assert!(close(betainc(10.0, 0.5, 0.99), 0.65792817515678448, 1e-12));
        assert!(close(student_t_two_sided(2.1, 7.3), 0.072246713424853282, 1e-12));
        assert!(close(student_t_two_sided(0.5, 99.0), 0.61818464402440609, 1e-12));
        assert!(close(f_sf(3.4, 5.0, 94.0), 0.007223674998095714, 1e-12));
        assert!(close(f_sf(1.0, 3.0, 50.0), 0.40062322530428579, 1e-12));
        assert!(close(2.0 * normal_sf(1.96), 0.04999579029644087, 1e-14));
    }

    #[test]
    fn ks_matches_reference() {
        let o = two_sample_test(TestKind::Ks, &A, &B, 0).unwrap();
        assert!(close(o.statistic, 0.5, 1e-14));
        assert!(close(o.p_value, 0.96394524366487511, 1e-12));
        let shifted: Vec<f64> = A.iter().map(|v| v + 3.0).collect();
        let o = two_sample_test(TestKind::Ks, &A, &shifted, 0).unwrap();
        assert!(close(o.statistic, 1.0, 1e-14));
        assert!(close(o.p_value, 0.26999967167735456, 1e-12));
    }

    #[test]
    fn ks_disjoint_hand_example() {
        // {1,2,3,4} vs {5,6,7,8}: sup diff 1, C = sqrt(16/8). Exercises the
        // internal function because the public API requires 5+ samples.
        let (c, p) = ks_test(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]);
        assert!(close(c, SQRT_2, 1e-12));
        assert!(close(p, 0.036631052707119353, 1e-12));
    }

    #[test]
    fn ks_identical_samples() {
        let o = two_sample_test(TestKind::Ks, &A, &A, 0).unwrap();
        assert_eq!(o.statistic, 0.0);
        assert_eq!(o.p_value, 1.0);
    }

    #[test]
    fn ks_p_monotone_in_statistic() {
        let mut last = 1.0;
        for i in 1..40 {
            let p = ks_series_p(i as f64 * 0.1);
            assert!(p <= last + 1e-15);
            last = p;
        }
    }

    #[test]
    fn mwu_matches_reference() {
        let o = two_sample_test(TestKind::Mwu, &A, &B, 0).unwrap();
        assert!(close(o.statistic, 25.0, 1e-12));
        assert!(close(o.p_value, 0.49483653811309736, 1e-12));
        // tied data
        let at = [1.0, 2.0, 2.0, 3.0, 4.0, 5.0, 5.0, 6.0];
        let bt = [2.0, 3.0, 3.0, 4.0, 5.0, 6.0, 7.0, 7.0];
        let o = two_sample_test(TestKind::Mwu, &at, &bt, 0).unwrap();
        assert!(close(o.statistic, 21.0, 1e-12));
        assert!(close(o.p_value, 0.2648127507746576, 1e-12));
    }

    #[test]
    fn mwu_all_tied_gives_one() {
        let x = [2.0; 8];
        let o = two_sample_test(TestKind::Mwu, &x, &x, 0).unwrap();
        assert_eq!(o.p_value, 1.0);
    }

    #[test]
    fn welch_matches_reference() {
        let o = two_sample_test(TestKind::Welch, &A, &B, 0).unwrap();
        assert!(close(o.statistic, -0.72136156678732033, 1e-12));
        assert!(close(o.p_value, 0.48279995068127413, 1e-12));
    }

    #[test]
    fn welch_constant_sample_guards() {
        let c1 = [1.0; 6];
        let c2 = [2.0; 6];
        let o = two_sample_test(TestKind::Welch, &c1, &c1, 0).unwrap();
        assert_eq!(o.p_value, 1.0);
        let o = two_sample_test(TestKind::Welch, &c1, &c2, 0).unwrap();
        assert_eq!(o.p_value, 0.0);
    }

    #[test]
    fn wsr_matches_reference() {
        let o = two_sample_test(TestKind::Wsr, &A, &B, 0).unwrap();
        assert_eq!(o.statistic, 0.0);
        assert!(close(o.p_value, 0.014266186701446923, 1e-12));
    }

    #[test]
    fn wsr_requires_pairing_and_drops_zeros() {
        assert!(two_sample_test(TestKind::Wsr, &A, &B[..5], 0).is_err());
        let o = two_sample_test(TestKind::Wsr, &A, &A, 0).unwrap();
        assert_eq!(o.p_value, 1.0);
    }

    #[test]
    fn cvm_statistic_matches_reference() {
        let o = two_sample_test(TestKind::Cvm, &A, &B, 7).unwrap();
        assert!(close(o.statistic, 0.078125, 1e-15));
    }

    #[test]
    fn ad_statistic_matches_reference() {
        let o = two_sample_test(TestKind::Ad, &A, &B, 7).unwrap();
        assert!(close(o.statistic, 0.52891552891552884, 1e-12));
    }

    #[test]
    fn permutation_p_is_deterministic_and_never_zero() {
        let far: Vec<f64> = A.iter().map(|v| v + 50.0).collect();
        for kind in [TestKind::Cvm, TestKind::Ad] {
            let o1 = two_sample_test(kind, &A, &far, 3).unwrap();
            let o2 = two_sample_test(kind, &A, &far, 3).unwrap();
            assert_eq!(o1.p_value, o2.p_value);
            assert!(o1.p_value >= 1.0 / 200.0);
            assert_eq!(o1.p_value, 1.0 / 200.0); // maximal separation
            let id = two_sample_test(kind, &A, &A, 3).unwrap();
            assert_eq!(id.p_value, 1.0);
        }
    }

    #[test]
    fn symmetry_of_p_values() {
        for kind in [TestKind::Ks, TestKind::Mwu, TestKind::Cvm, TestKind::Ad] {
            let ab = two_sample_test(kind, &A, &B, 11).unwrap();
            let ba = two_sample_test(kind, &B, &A, 11).unwrap();
            assert_eq!(ab.p_value, ba.p_value, "{}", kind.name());
        }
        let ab = two_sample_test(TestKind::Welch, &A, &B, 0).unwrap();
        let ba = two_sample_test(TestKind::Welch, &B, &A, 0).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        assert!(close(ab.statistic, -ba.statistic, 1e-15));
    }

    #[test]
    fn asymmetric_sizes_keep_permutation_symmetry() {
        let long: Vec<f64> = (0..19).map(|i| i as f64 * 0.37 - 2.0).collect();
        for kind in [TestKind::Cvm, TestKind::Ad] {
            let ab = two_sample_test(kind, &A, &long, 5).unwrap();
            let ba = two_sample_test(kind, &long, &A, 5).unwrap();
            assert_eq!(ab.p_value, ba.p_value);
            assert!(close(ab.statistic, ba.statistic, 1e-12));
        }
    }

    #[test]
    fn decide_uses_strict_inequality() {
        let o = TestOutcome {
            kind: TestKind::Ks,
            statistic: 1.0,
            p_value: 0.05,
            n_a: 10,
            n_b: 10,
        };
        assert!(!decide(&o, 0.05));
        assert!(decide(&o, 0.051));
        let o2 = TestOutcome { p_value: 0.01, ..o };
        assert!(decide(&o2, 0.05));
        let o3 = TestOutcome { p_value: 0.20, ..o };
        assert!(!decide(&o3, 0.05));
    }

    #[test]
    fn minimum_sample_sizes_enforced() {
        let short = [1.0, 2.0, 3.0, 4.0];
        assert!(two_sample_test(TestKind::Ks, &short, &B, 0).is_err());
        assert!(two_sample_test(TestKind::Ks, &A, &short, 0).is_err());
    }

    #[test]
    fn null_calibration_smoke() {
        // Small-scale version of the acceptance criterion: rejection rate
        // near alpha under the null. 300 reps keeps the unit suite fast.
        let reps = 300;
        let mut rejected = [0usize; 6];
        for rep in 0..reps {
            let mut rng = Prng::derive(99, &[rep as u64]);
            let a: Vec<f64> = (0..60).map(|_| rng.normal()).collect();
            let b: Vec<f64> = (0..60).map(|_| rng.normal()).collect();
            for (ti, &kind) in TestKind::ALL.iter().enumerate() {
                let o = two_sample_test(kind, &a, &b, 1000 + rep as u64).unwrap();
                if decide(&o, 0.05) {
                    rejected[ti] += 1;
                }
            }
        }
        for (ti, &kind) in TestKind::ALL.iter().enumerate() {
            let rate = rejected[ti] as f64 / reps as f64;
            assert!(
                rate <= 0.10,
                "{} null rejection rate {rate}",
                kind.name()
            );
        }
    }

    #[test]
    fn sensitivity_study_shape_and_control() {
        let rows = sensitivity_study(40, 100, 4).unwrap();
        assert_eq!(rows.len(), 6 * 5);
        for row in &rows {
            if row.test == TestKind::Wsr && row.perturbation == Perturbation::HalfN {
                assert!(row.power.is_nan());
            } else {
                assert!((0.0..=1.0).contains(&row.power));
                if row.perturbation == Perturbation::None {
                    assert!(row.power <= 0.12, "{} control {}", row.test.name(), row.power);
                }
            }
        }
        // mean shift at n=40 is detectable reasonably often by KS
        let ks_shift = rows
            .iter()
            .find(|r| r.test == TestKind::Ks && r.perturbation == Perturbation::MeanShift)
            .unwrap();
        assert!(ks_shift.power > 0.3, "KS mean-shift power {}", ks_shift.power);
    }

    #[test]
    fn sensitivity_study_validates_input() {
        assert!(sensitivity_study(10, 100, 0).is_err());
        assert!(sensitivity_study(40, 50, 0).is_err());
    }
}
