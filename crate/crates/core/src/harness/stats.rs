use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest group size for which the exact null distribution is enumerated.
pub const EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
}

/// Midranks (1-based) of `values`, ties sharing the average rank.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Visits every `k`-subset of `0..n` as a sorted index list.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Two-sided Mann-Whitney U test.
///
/// When both samples have at most [`EXACT_LIMIT`] values the p-value is the
/// share of all rank assignments whose U is at least as far from its mean as
/// the observed one. Larger samples use the normal approximation with tie
/// and continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::usage("Mann-Whitney U needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::usage("Mann-Whitney U samples must not contain NaN"));
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let u = ranks[..n1].iter().sum::<f64>() - offset;
    let mean = (n1 * n2) as f64 / 2.0;
    let observed = (u - mean).abs();

    if n1.max(n2) <= EXACT_LIMIT {
        let (mut extreme, mut total) = (0u64, 0u64);
        for_each_subset(n1 + n2, n1, |idx| {
            let ua = idx.iter().map(|&i| ranks[i]).sum::<f64>() - offset;
            total += 1;
            if (ua - mean).abs() >= observed - 1e-9 {
                extreme += 1;
            }
        });
        return Ok(MannWhitney {
            u,
            p: extreme as f64 / total as f64,
            exact: true,
        });
    }

    let n = (n1 + n2) as f64;
    let mut sorted = pooled;
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        tie_term += (j * j * j - j) as f64;
        i += j;
    }
    let variance = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return Ok(MannWhitney {
            u,
            p: 1.0,
            exact: false,
        });
    }
    let z = (observed - 0.5).max(0.0) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = (2.0 * (1.0 - normal.cdf(z))).min(1.0);
    Ok(MannWhitney { u, p, exact: false })
}

/// Median, averaging the two middle values on even counts.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::usage("median of an empty list"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Percentile bootstrap confidence interval of the median.
pub fn bootstrap_median_ci<R: Rng + ?Sized>(
    samples: &[f64],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::usage("bootstrap of an empty sample"));
    }
    if resamples == 0 || !(0.0..1.0).contains(&level) {
        return Err(Error::usage(format!(
            "bootstrap needs resamples >= 1 and a level in [0, 1), got {resamples} and {level}"
        )));
    }
    let n = samples.len();
    let mut buf = vec![0.0; n];
    let mut medians: Vec<f64> = (0..resamples)
        .map(|_| {
            for x in buf.iter_mut() {
                *x = samples[rng.random_range(0..n)];
            }
            median(&buf).expect("non-empty resample")
        })
        .collect();
    medians.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let last = (resamples - 1) as f64;
    let lo = (tail * last).floor() as usize;
    let hi = ((1.0 - tail) * last).ceil() as usize;
    Ok((medians[lo], medians[hi.min(resamples - 1)]))
}

/// Running median over a centered window, truncated at the edges.
pub fn median_filter(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::usage(format!(
            "median filter window must be odd, got {window}"
        )));
    }
    let half = window / 2;
    (0..series.len())
        .map(|i| median(&series[i.saturating_sub(half)..(i + half + 1).min(series.len())]))
        .collect()
}

/// Consecutive positives needed before a run of significance indicators is
/// trusted, for `tests` comparisons.
pub fn required_run_length(tests: usize) -> usize {
    match tests {
        0..=20 => 2,
        21..=410 => 3,
        _ => {
            // tests * 0.05^len <= 0.05, in integers: 20 * tests <= 20^len
            let target = 20 * tests as u128;
            let mut len = 4;
            while 20u128.pow(len) < target {
                len += 1;
            }
            len as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceBands {
    pub corrected_alpha: f64,
    pub required_run: usize,
    /// Per checkpoint: p-value at or below the corrected alpha.
    pub positive: Vec<bool>,
    /// Per checkpoint: positive and part of a long enough run.
    pub valid: Vec<bool>,
}

/// Bonferroni-corrected significance indicators with the run-length rule.
pub fn significance_bands(
    p_values: &[f64],
    alpha: f64,
    treatment_count: usize,
) -> Result<SignificanceBands> {
    if treatment_count == 0 || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::usage(format!(
            "significance bands need alpha in (0, 1] and at least one treatment, got {alpha} and {treatment_count}"
        )));
    }
    let corrected_alpha = alpha / treatment_count as f64;
    let positive: Vec<bool> = p_values.iter().map(|&p| p <= corrected_alpha).collect();
    let required_run = required_run_length(p_values.len());
    let mut valid = vec![false; positive.len()];
    let mut start = 0;
    while start < positive.len() {
        if !positive[start] {
            start += 1;
            continue;
        }
        let len = positive[start..].iter().take_while(|&&b| b).count();
        if len >= required_run {
            valid[start..start + len].fill(true);
        }
        start += len;
    }
    Ok(SignificanceBands {
        corrected_alpha,
        required_run,
        positive,
        valid,
    })
}
