//! The CMOEA bin archive.
//!
//! Every bin owns a subtask set and a fixed number of members. Children are
//! offered to every bin, and each bin keeps the members that are best on the
//! two-objective problem (aggregate over its subtasks, mean behavioral
//! distance to the rest of its candidate pool).

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maze::manhattan;
use crate::moea::{nsga2_parent_tournament, nsga2_survivor_select, rank_population};
use crate::neuro::{mutate, MutationConfig, NetworkGenome};
use crate::objectives::{aggregate_unchecked, Aggregation, Evaluation, Individual};
use crate::rng::{StreamRng, Streams};

/// Largest subtask count for which every non-empty subset gets a bin.
pub const MAX_EXHAUSTIVE_SUBTASKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WithinBinSelector {
    #[default]
    Nsga2,
    /// Novelty search with local competition: drop the weaker of the
    /// closest pair until the bin fits.
    Nslc,
}

/// A bin resident with its cached bin-specific scores.
#[derive(Debug, Clone)]
pub struct Member {
    pub individual: Individual,
    pub aggregate: f64,
    pub diversity: f64,
}

#[derive(Debug, Clone)]
pub struct Bin {
    pub subtasks: Vec<usize>,
    pub members: Vec<Member>,
    pub is_dynamic: bool,
    pub aggregation: Aggregation,
}

impl Bin {
    pub fn new(subtasks: Vec<usize>, is_dynamic: bool, aggregation: Aggregation) -> Self {
        Self {
            subtasks,
            members: Vec::new(),
            is_dynamic,
            aggregation,
        }
    }

    fn aggregate_of(&self, ind: &Individual) -> Result<f64> {
        let e = ind.evaluated()?;
        if let Some(&bad) = self.subtasks.iter().find(|&&k| k >= e.objectives.len()) {
            return Err(Error::usage(format!(
                "subtask {bad} out of range for {} objectives",
                e.objectives.len()
            )));
        }
        Ok(aggregate_unchecked(
            e.objectives.scores(),
            &self.subtasks,
            self.aggregation,
        ))
    }

    /// Recomputes member aggregates and diversity from the current membership.
    pub fn refresh(&mut self) -> Result<()> {
        let aggregates = self
            .members
            .iter()
            .map(|m| self.aggregate_of(&m.individual))
            .collect::<Result<Vec<_>>>()?;
        let descriptors = descriptors(self.members.iter().map(|m| &m.individual))?;
        let diversity = mean_distances(&descriptors);
        for ((m, a), d) in self.members.iter_mut().zip(aggregates).zip(diversity) {
            m.aggregate = a;
            m.diversity = d;
        }
        Ok(())
    }

    pub fn best_aggregate(&self) -> Option<f64> {
        self.members.iter().map(|m| m.aggregate).reduce(f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct BinArchive {
    pub bins: Vec<Bin>,
    pub bin_size: usize,
    pub subtask_count: usize,
    pub selector: WithinBinSelector,
    /// Identifier handed to the next child.
    pub next_id: u64,
}

fn check_subtask_count(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::usage("an archive needs at least one subtask"));
    }
    Ok(())
}

/// Random non-empty subtask set, each subtask included with probability 1/2.
pub fn random_subtask_set<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<usize> {
    loop {
        let set: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
        if !set.is_empty() {
            return set;
        }
    }
}

/// Builds the bins for `m` subtasks.
///
/// Without a cap every non-empty subset gets a bin; the same happens when
/// the cap is large enough to hold them all. Otherwise the archive holds the
/// all-tasks bin, one bin per subtask, and dynamic bins for the rest.
pub fn init_bins<R: Rng + ?Sized>(
    m: usize,
    cap: Option<usize>,
    bin_size: usize,
    aggregation: Aggregation,
    rng: &mut R,
) -> Result<BinArchive> {
    check_subtask_count(m)?;
    if bin_size == 0 {
        return Err(Error::usage("bin size must be positive"));
    }
    if let Some(c) = cap {
        if c < m + 1 {
            return Err(Error::usage(format!(
                "bin cap {c} is below the minimum {}",
                m + 1
            )));
        }
    }
    let exhaustive_count = (m <= MAX_EXHAUSTIVE_SUBTASKS).then(|| (1usize << m) - 1);
    let bins = match (cap, exhaustive_count) {
        (None, Some(_)) => exhaustive(m, aggregation),
        (Some(c), Some(full)) if c >= full => exhaustive(m, aggregation),
        (None, None) => {
            return Err(Error::usage(format!(
                "{m} subtasks need a bin cap; at most {MAX_EXHAUSTIVE_SUBTASKS} can be enumerated"
            )))
        }
        (Some(c), _) => {
            let mut bins = vec![Bin::new((0..m).collect(), false, aggregation)];
            bins.extend((0..m).map(|k| Bin::new(vec![k], false, aggregation)));
            while bins.len() < c {
                bins.push(Bin::new(random_subtask_set(m, rng), true, aggregation));
            }
            bins
        }
    };
    Ok(BinArchive {
        bins,
        bin_size,
        subtask_count: m,
        selector: WithinBinSelector::Nsga2,
        next_id: 0,
    })
}

fn exhaustive(m: usize, aggregation: Aggregation) -> Vec<Bin> {
    (1u64..(1 << m))
        .map(|mask| {
            let set = (0..m).filter(|&k| mask >> k & 1 == 1).collect();
            Bin::new(set, false, aggregation)
        })
        .collect()
}

/// Archive with only the all-tasks bin.
pub fn single_bin_archive(
    m: usize,
    bin_size: usize,
    aggregation: Aggregation,
) -> Result<BinArchive> {
    check_subtask_count(m)?;
    if bin_size == 0 {
        return Err(Error::usage("bin size must be positive"));
    }
    Ok(BinArchive {
        bins: vec![Bin::new((0..m).collect(), false, aggregation)],
        bin_size,
        subtask_count: m,
        selector: WithinBinSelector::Nsga2,
        next_id: 0,
    })
}

fn descriptors<'a>(inds: impl Iterator<Item = &'a Individual>) -> Result<Vec<&'a [f64]>> {
    let out: Vec<&[f64]> = inds
        .map(|i| i.evaluated().map(|e| e.descriptor.values()))
        .collect::<Result<_>>()?;
    if let Some(first) = out.first() {
        if let Some(bad) = out.iter().find(|d| d.len() != first.len()) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: first.len(),
            });
        }
    }
    Ok(out)
}

/// Mean distance from each descriptor to every other one (zero when alone).
fn mean_distances(desc: &[&[f64]]) -> Vec<f64> {
    let n = desc.len();
    let mut sums = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = manhattan(desc[i], desc[j]);
            sums[i] += d;
            sums[j] += d;
        }
    }
    let denom = n.saturating_sub(1).max(1) as f64;
    sums.into_iter().map(|s| s / denom).collect()
}

/// Keeps `bin_size` members of `pool`, whose per-candidate mean pool distance
/// is `diversity`.
fn select_from_pool<R: Rng + ?Sized>(
    bin: &Bin,
    bin_size: usize,
    selector: WithinBinSelector,
    pool: Vec<Individual>,
    diversity: Vec<f64>,
    rng: &mut R,
) -> Result<Vec<Member>> {
    let aggregates = pool
        .iter()
        .map(|i| bin.aggregate_of(i))
        .collect::<Result<Vec<_>>>()?;
    let keep: Vec<usize> = if pool.len() <= bin_size {
        (0..pool.len()).collect()
    } else {
        match selector {
            WithinBinSelector::Nsga2 => {
                let points: Vec<[f64; 2]> = aggregates
                    .iter()
                    .zip(&diversity)
                    .map(|(&a, &d)| [a, d])
                    .collect();
                let mut keep = nsga2_survivor_select(&points, bin_size, rng)?;
                keep.sort_unstable();
                keep
            }
            WithinBinSelector::Nslc => {
                let desc = descriptors(pool.iter())?;
                nslc_keep(&desc, &aggregates, bin_size, rng)
            }
        }
    };
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    let mut members: Vec<Member> = keep
        .into_iter()
        .map(|k| Member {
            individual: slots[k].take().expect("selected indices are distinct"),
            aggregate: aggregates[k],
            diversity: 0.0,
        })
        .collect();
    let diversity = mean_distances(&descriptors(members.iter().map(|m| &m.individual))?);
    for (m, d) in members.iter_mut().zip(diversity) {
        m.diversity = d;
    }
    Ok(members)
}

/// Selects the new members of `bin` from `candidates` (residents and
/// children together).
pub fn within_bin_select<R: Rng + ?Sized>(
    bin: &Bin,
    bin_size: usize,
    candidates: Vec<Individual>,
    rng: &mut R,
) -> Result<Vec<Member>> {
    let desc = descriptors(candidates.iter())?;
    let diversity = mean_distances(&desc);
    select_from_pool(
        bin,
        bin_size,
        WithinBinSelector::Nsga2,
        candidates,
        diversity,
        rng,
    )
}

/// Pool indices that survive closest-pair elimination.
fn nslc_keep<R: Rng + ?Sized>(
    desc: &[&[f64]],
    aggregates: &[f64],
    bin_size: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut alive: Vec<usize> = (0..desc.len()).collect();
    while alive.len() > bin_size {
        let mut best = (f64::INFINITY, 0, 0);
        for (x, &i) in alive.iter().enumerate() {
            for (y, &j) in alive.iter().enumerate().skip(x + 1) {
                let d = manhattan(desc[i], desc[j]);
                if d < best.0 {
                    best = (d, x, y);
                }
            }
        }
        let (_, x, y) = best;
        let (ai, aj) = (aggregates[alive[x]], aggregates[alive[y]]);
        let drop = if ai < aj || (ai == aj && rng.random_bool(0.5)) {
            x
        } else {
            y
        };
        alive.remove(drop);
    }
    alive
}

/// Closest-pair elimination: while the pool is too large, find the two
/// candidates with the smallest descriptor distance and remove the one with
/// the lower aggregate.
pub fn nslc_within_bin_select<R: Rng + ?Sized>(
    bin: &Bin,
    bin_size: usize,
    candidates: Vec<Individual>,
    rng: &mut R,
) -> Result<Vec<Member>> {
    let diversity = vec![0.0; candidates.len()];
    select_from_pool(
        bin,
        bin_size,
        WithinBinSelector::Nslc,
        candidates,
        diversity,
        rng,
    )
}

fn bin_rng(streams: &Streams, generation: u32, bin: usize) -> StreamRng {
    streams.stream("bin", &[u64::from(generation), bin as u64])
}

impl BinArchive {
    pub fn with_selector(mut self, selector: WithinBinSelector) -> Self {
        self.selector = selector;
        self
    }

    pub fn population_size(&self) -> usize {
        self.bins.iter().map(|b| b.members.len()).sum()
    }

    pub fn is_single_bin(&self) -> bool {
        self.bins.len() == 1
    }

    pub fn dynamic_bin_count(&self) -> usize {
        self.bins.iter().filter(|b| b.is_dynamic).count()
    }

    /// The bin whose subtask set covers every subtask.
    pub fn all_tasks_bin(&self) -> &Bin {
        self.bins
            .iter()
            .find(|b| b.subtasks.len() == self.subtask_count)
            .expect("archive always holds the all-tasks bin")
    }

    /// Every distinct individual in the archive, ordered by id.
    pub fn unique_individuals(&self) -> Vec<&Individual> {
        let mut map = BTreeMap::new();
        for m in self.bins.iter().flat_map(|b| &b.members) {
            map.entry(m.individual.id).or_insert(&m.individual);
        }
        map.into_values().collect()
    }

    /// Offers every individual in `initial` to every bin.
    pub fn seed(&mut self, initial: &[Individual], streams: &Streams) -> Result<()> {
        if initial.is_empty() {
            return Err(Error::usage("cannot seed an archive with no individuals"));
        }
        for ind in initial {
            let e = ind.evaluated()?;
            if e.objectives.len() != self.subtask_count {
                return Err(Error::LengthMismatch {
                    left: e.objectives.len(),
                    right: self.subtask_count,
                });
            }
        }
        let desc = descriptors(initial.iter())?;
        let diversity = mean_distances(&desc);
        let (bin_size, selector) = (self.bin_size, self.selector);
        let chosen = self
            .bins
            .par_iter()
            .enumerate()
            .map(|(b, bin)| {
                let mut rng = bin_rng(streams, 0, b);
                select_from_pool(
                    bin,
                    bin_size,
                    selector,
                    initial.to_vec(),
                    diversity.clone(),
                    &mut rng,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        for (bin, members) in self.bins.iter_mut().zip(chosen) {
            bin.members = members;
        }
        self.next_id = self
            .next_id
            .max(initial.iter().map(|i| i.id + 1).max().unwrap_or(0));
        Ok(())
    }
}

/// Seeds `archive` with the initial population.
pub fn seed_archive(
    archive: &mut BinArchive,
    initial: &[Individual],
    streams: &Streams,
) -> Result<()> {
    archive.seed(initial, streams)
}

/// `k` independent uniform draws over every (bin, slot) pair.
pub fn sample_parents<R: Rng + ?Sized>(
    archive: &BinArchive,
    k: usize,
    rng: &mut R,
) -> Vec<Individual> {
    let total = archive.population_size();
    if k == 0 || total == 0 {
        return Vec::new();
    }
    (0..k)
        .map(|_| {
            let mut slot = rng.random_range(0..total);
            for bin in &archive.bins {
                if slot < bin.members.len() {
                    return bin.members[slot].individual.clone();
                }
                slot -= bin.members.len();
            }
            unreachable!("slot index within population size")
        })
        .collect()
}

/// Parents for the single-bin treatment: NSGA-II tournaments over
/// (aggregate, diversity) of the current members.
pub fn tournament_parents<R: Rng + ?Sized>(
    bin: &Bin,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let points: Vec<[f64; 2]> = bin
        .members
        .iter()
        .map(|m| [m.aggregate, m.diversity])
        .collect();
    let ranking = rank_population(&points)?;
    Ok((0..k)
        .map(|_| {
            bin.members[nsga2_parent_tournament(&ranking, rng)]
                .individual
                .clone()
        })
        .collect())
}

/// Picks a dynamic bin and a fresh subtask set for it, without applying it.
fn plan_reassignment<R: Rng + ?Sized>(
    archive: &BinArchive,
    rng: &mut R,
) -> Option<(usize, Vec<usize>)> {
    let dynamic: Vec<usize> = (0..archive.bins.len())
        .filter(|&b| archive.bins[b].is_dynamic)
        .collect();
    if dynamic.is_empty() {
        return None;
    }
    let b = dynamic[rng.random_range(0..dynamic.len())];
    Some((b, random_subtask_set(archive.subtask_count, rng)))
}

fn apply_reassignment(archive: &mut BinArchive, b: usize, set: Vec<usize>) -> Result<()> {
    let bin = &mut archive.bins[b];
    bin.subtasks = set;
    bin.refresh()
}

/// Gives one random dynamic bin a fresh subtask set, keeping its members.
/// Returns the index of the reassigned bin.
pub fn reassign_dynamic_bin<R: Rng + ?Sized>(
    archive: &mut BinArchive,
    rng: &mut R,
) -> Result<Option<usize>> {
    match plan_reassignment(archive, rng) {
        Some((b, set)) => {
            apply_reassignment(archive, b, set)?;
            Ok(Some(b))
        }
        None => Ok(None),
    }
}

/// Scores a genome on every subtask.
pub trait Evaluator: Sync {
    fn evaluate(&self, genome: &NetworkGenome) -> Result<Evaluation>;
}

impl<F> Evaluator for F
where
    F: Fn(&NetworkGenome) -> Result<Evaluation> + Sync,
{
    fn evaluate(&self, genome: &NetworkGenome) -> Result<Evaluation> {
        self(genome)
    }
}

/// Per-generation inputs shared by every treatment.
#[derive(Debug, Clone, Copy)]
pub struct GenerationContext<'a> {
    pub generation: u32,
    pub offspring: usize,
    pub mutation: &'a MutationConfig,
    pub streams: &'a Streams,
}

/// Mutates each parent into one evaluated child, in parallel. Child `i`
/// uses its own random stream, so the result does not depend on scheduling.
pub fn breed<E: Evaluator + ?Sized>(
    parents: &[Individual],
    first_id: u64,
    ctx: &GenerationContext<'_>,
    evaluator: &E,
) -> Result<Vec<Individual>> {
    parents
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = ctx
                .streams
                .stream("mutate", &[u64::from(ctx.generation), i as u64]);
            let genome = mutate(&p.genome, &mut rng, ctx.mutation);
            let evaluation = evaluator.evaluate(&genome)?;
            Ok(Individual::new(first_id + i as u64, genome, ctx.generation)
                .with_evaluation(evaluation))
        })
        .collect()
}

/// What a CMOEA generation produced.
#[derive(Debug, Clone)]
pub struct GenerationOutcome {
    pub children: Vec<Individual>,
    /// Dynamic bin whose subtask set was redrawn, if any.
    pub reassigned: Option<usize>,
}

/// One CMOEA generation: reassign a dynamic bin, breed `offspring`
/// children from random archive members, offer them to every bin and run
/// within-bin selection. On error the archive is left untouched.
pub fn cmoea_generation<E: Evaluator + ?Sized>(
    archive: &mut BinArchive,
    ctx: &GenerationContext<'_>,
    evaluator: &E,
) -> Result<GenerationOutcome> {
    let generation = u64::from(ctx.generation);
    let reassignment =
        plan_reassignment(archive, &mut ctx.streams.stream("reassign", &[generation]));
    let mut parent_rng = ctx.streams.stream("parents", &[generation]);
    let parents = if archive.is_single_bin() {
        tournament_parents(&archive.bins[0], ctx.offspring, &mut parent_rng)?
    } else {
        sample_parents(archive, ctx.offspring, &mut parent_rng)
    };
    let children = breed(&parents, archive.next_id, ctx, evaluator)?;
    for c in &children {
        let n = c.evaluated()?.objectives.len();
        if n != archive.subtask_count {
            return Err(Error::Evaluation(format!(
                "evaluator returned {n} scores for {} subtasks",
                archive.subtask_count
            )));
        }
    }

    let mut updated = archive.bins.clone();
    let reassigned = reassignment.as_ref().map(|r| r.0);
    if let Some((b, set)) = reassignment {
        updated[b].subtasks = set;
        updated[b].refresh()?;
    }

    let child_desc = descriptors(children.iter())?;
    let n_children = children.len();
    // children are offered to every bin, so their mutual distances are shared
    let mut child_sums = vec![0.0; n_children];
    for i in 0..n_children {
        for j in i + 1..n_children {
            let d = manhattan(child_desc[i], child_desc[j]);
            child_sums[i] += d;
            child_sums[j] += d;
        }
    }

    let (bin_size, selector) = (archive.bin_size, archive.selector);
    let chosen = updated
        .par_iter()
        .enumerate()
        .map(|(b, bin)| {
            let residents: Vec<Individual> =
                bin.members.iter().map(|m| m.individual.clone()).collect();
            let res_desc = descriptors(residents.iter())?;
            let pool_size = residents.len() + n_children;
            let mut sums = vec![0.0; pool_size];
            for (r, rd) in res_desc.iter().enumerate() {
                for (s, sd) in res_desc.iter().enumerate().skip(r + 1) {
                    let d = manhattan(rd, sd);
                    sums[r] += d;
                    sums[s] += d;
                }
                for (c, cd) in child_desc.iter().enumerate() {
                    let d = manhattan(rd, cd);
                    sums[r] += d;
                    sums[residents.len() + c] += d;
                }
            }
            let denom = pool_size.saturating_sub(1).max(1) as f64;
            let diversity: Vec<f64> = sums
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let shared = i
                        .checked_sub(residents.len())
                        .map_or(0.0, |c| child_sums[c]);
                    (s + shared) / denom
                })
                .collect();
            let mut pool = residents;
            pool.extend(children.iter().cloned());
            let mut rng = bin_rng(ctx.streams, ctx.generation, b);
            select_from_pool(bin, bin_size, selector, pool, diversity, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    for (bin, members) in updated.iter_mut().zip(chosen) {
        bin.members = members;
    }
    archive.bins = updated;
    archive.next_id += n_children as u64;
    Ok(GenerationOutcome {
        children,
        reassigned,
    })
}
