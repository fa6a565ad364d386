use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nsga2::{check_survivor_count, check_uniform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexicaseVariant {
    Plain,
    Static,
    SemiDynamic,
    #[default]
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsilonMode {
    Fixed {
        value: f64,
    },
    #[default]
    Mad,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexicaseConfig {
    pub variant: LexicaseVariant,
    pub epsilon: EpsilonMode,
}

impl LexicaseConfig {
    pub fn plain() -> Self {
        Self {
            variant: LexicaseVariant::Plain,
            epsilon: EpsilonMode::Fixed { value: 0.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let EpsilonMode::Fixed { value } = self.epsilon {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Config(format!(
                    "lexicase epsilon must be >= 0, got {value}"
                )));
            }
        }
        Ok(())
    }
}

fn lower_median(sorted: &[f64]) -> f64 {
    sorted[(sorted.len() - 1) / 2]
}

fn column<V: AsRef<[f64]>>(pop: &[V], idx: &[usize], k: usize) -> Vec<f64> {
    idx.iter().map(|&i| pop[i].as_ref()[k]).collect()
}

fn mad_unchecked(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let med = lower_median(&v);
    let mut dev: Vec<f64> = v.iter().map(|x| (x - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    lower_median(&dev)
}

/// Median absolute deviation, using the lower median on even counts.
pub fn mad(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::usage("median absolute deviation of an empty list"));
    }
    Ok(mad_unchecked(values.to_vec()))
}

/// Runs the lexicase filter for a fixed objective order and returns the
/// surviving candidate indices in population order.
///
/// A static threshold can lie above every remaining candidate; the filter
/// then leaves the candidate set unchanged for that objective.
pub fn lexicase_filter<V: AsRef<[f64]>>(
    pop: &[V],
    order: &[usize],
    cfg: &LexicaseConfig,
) -> Result<Vec<usize>> {
    let m = check_uniform(pop)?;
    if let Some(&bad) = order.iter().find(|&&k| k >= m) {
        return Err(Error::usage(format!(
            "objective {bad} out of range for {m} objectives"
        )));
    }
    let fixed = match cfg.epsilon {
        EpsilonMode::Fixed { value } => Some(value),
        EpsilonMode::Mad => None,
    };
    let everyone: Vec<usize> = (0..pop.len()).collect();
    let mut candidates = everyone.clone();
    for &k in order {
        if candidates.len() == 1 {
            break;
        }
        let max_of = |idx: &[usize]| {
            column(pop, idx, k)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let (threshold, eps) = match cfg.variant {
            LexicaseVariant::Plain => (max_of(&candidates), 0.0),
            LexicaseVariant::Static => (
                max_of(&everyone),
                fixed.unwrap_or_else(|| mad_unchecked(column(pop, &everyone, k))),
            ),
            LexicaseVariant::SemiDynamic => (
                max_of(&candidates),
                fixed.unwrap_or_else(|| mad_unchecked(column(pop, &everyone, k))),
            ),
            LexicaseVariant::Dynamic => (
                max_of(&candidates),
                mad_unchecked(column(pop, &candidates, k)),
            ),
        };
        let bound = threshold - eps;
        let kept: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&i| pop[i].as_ref()[k] >= bound)
            .collect();
        if !kept.is_empty() {
            candidates = kept;
        }
    }
    Ok(candidates)
}

/// Lexicase parent selection: shuffles the objectives, filters, and picks
/// uniformly among the survivors.
pub fn lexicase_select<V: AsRef<[f64]>, R: Rng + ?Sized>(
    pop: &[V],
    rng: &mut R,
    cfg: &LexicaseConfig,
) -> Result<usize> {
    let m = check_uniform(pop)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let survivors = lexicase_filter(pop, &order, cfg)?;
    Ok(survivors[rng.random_range(0..survivors.len())])
}

/// Selects `n` distinct pool indices by repeated lexicase selection over
/// the shrinking pool.
pub fn lexicase_survivor_select<V: AsRef<[f64]>, R: Rng + ?Sized>(
    pool: &[V],
    n: usize,
    rng: &mut R,
    cfg: &LexicaseConfig,
) -> Result<Vec<usize>> {
    check_survivor_count(pool.len(), n)?;
    if n == pool.len() {
        return Ok((0..n).collect());
    }
    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    let mut selected = Vec::with_capacity(n);
    while selected.len() < n {
        let view: Vec<&[f64]> = remaining.iter().map(|&i| pool[i].as_ref()).collect();
        let pick = lexicase_select(&view, rng, cfg)?;
        selected.push(remaining.remove(pick));
    }
    Ok(selected)
}
