//! Objective vectors, individuals and the comparisons every algorithm shares.
//!
//! All objectives are maximized.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_same_len, Error, Result};
use crate::neuro::NetworkGenome;

/// Per-subtask scores of one individual, one entry per objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    /// Builds a vector of domain scores. Negative or non-finite scores are
    /// rejected rather than clipped so that scoring bugs surface early.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some((i, s)) = scores
            .iter()
            .enumerate()
            .find(|(_, s)| !s.is_finite() || **s < 0.0)
        {
            return Err(Error::usage(format!(
                "objective {i} has invalid score {s}; scores must be finite and non-negative"
            )));
        }
        Ok(Self(scores))
    }

    pub fn scores(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Final robot positions over all training mazes, `[x0, y0, x1, y1, ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BehaviorDescriptor(pub Vec<f64>);

impl BehaviorDescriptor {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Everything learned by evaluating a genome on the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objectives: ObjectiveVector,
    pub descriptor: BehaviorDescriptor,
    pub solved: usize,
}

impl Evaluation {
    /// Mean score over all objectives; the training performance of the individual.
    pub fn mean_performance(&self) -> f64 {
        mean(self.objectives.scores())
    }
}

/// A genome together with its (optional) evaluation.
///
/// Genomes and evaluations are immutable and shared, so cloning an individual
/// into several bins is cheap and the copies can never influence each other.
#[derive(Debug, Clone)]
pub struct Individual {
    pub id: u64,
    pub genome: Arc<NetworkGenome>,
    pub birth_generation: u32,
    pub evaluation: Option<Arc<Evaluation>>,
}

impl Individual {
    pub fn new(id: u64, genome: NetworkGenome, birth_generation: u32) -> Self {
        Self {
            id,
            genome: Arc::new(genome),
            birth_generation,
            evaluation: None,
        }
    }

    pub fn with_evaluation(mut self, evaluation: Evaluation) -> Self {
        self.evaluation = Some(Arc::new(evaluation));
        self
    }

    pub fn is_evaluated(&self) -> bool {
        self.evaluation.is_some()
    }

    /// The evaluation, or a usage error for unevaluated individuals.
    pub fn evaluated(&self) -> Result<&Evaluation> {
        self.evaluation
            .as_deref()
            .ok_or_else(|| Error::usage(format!("individual {} is not evaluated", self.id)))
    }
}

/// How the scores of several subtasks are combined into one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Mean,
    Product,
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pareto dominance under maximization: `a` is nowhere worse and somewhere better.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    ensure_same_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::usage("dominance needs at least one objective"));
    }
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// The combined-target score: the unweighted mean of all objectives.
pub fn combined_target(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::usage("combined target of an empty vector"));
    }
    Ok(mean(v))
}

/// Like [`combined_target`] but with explicit per-objective weights; the
/// result is the weighted mean.
pub fn weighted_combined_target(v: &[f64], weights: &[f64]) -> Result<f64> {
    ensure_same_len(v.len(), weights.len())?;
    let total: f64 = weights.iter().sum();
    if v.is_empty() || total <= 0.0 || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::usage(
            "combined target weights must be non-negative with a positive sum",
        ));
    }
    Ok(v.iter().zip(weights).map(|(s, w)| s * w).sum::<f64>() / total)
}

/// Appends the combined-target score as an extra, final objective.
pub fn augment_with_ct(v: &ObjectiveVector) -> Result<ObjectiveVector> {
    let ct = combined_target(v.scores())?;
    let mut scores = v.scores().to_vec();
    scores.push(ct);
    Ok(ObjectiveVector(scores))
}

/// Combines the scores of `subset` by arithmetic mean or product.
pub fn aggregate(v: &[f64], subset: &[usize], mode: Aggregation) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::usage("aggregation over an empty subtask set"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= v.len()) {
        return Err(Error::usage(format!(
            "subtask index {bad} out of range for {} objectives",
            v.len()
        )));
    }
    Ok(aggregate_unchecked(v, subset, mode))
}

#[inline]
pub(crate) fn aggregate_unchecked(v: &[f64], subset: &[usize], mode: Aggregation) -> f64 {
    match mode {
        Aggregation::Mean => subset.iter().map(|&i| v[i]).sum::<f64>() / subset.len() as f64,
        Aggregation::Product => subset.iter().map(|&i| v[i]).product(),
    }
}
