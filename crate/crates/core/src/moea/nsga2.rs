use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::objectives::dominates_unchecked;

/// One non-dominated front: indices into the sorted population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Front {
    pub rank: usize,
    pub members: Vec<usize>,
}

pub(crate) fn check_uniform<V: AsRef<[f64]>>(pop: &[V]) -> Result<usize> {
    let m = pop.first().map_or(0, |v| v.as_ref().len());
    if m == 0 {
        return Err(Error::usage(
            "population must be non-empty with at least one objective",
        ));
    }
    if let Some(bad) = pop.iter().find(|v| v.as_ref().len() != m) {
        return Err(Error::LengthMismatch {
            left: bad.as_ref().len(),
            right: m,
        });
    }
    Ok(m)
}

/// Partitions the population into ranked non-dominated fronts.
pub fn fast_nondominated_sort<V: AsRef<[f64]>>(pop: &[V]) -> Result<Vec<Front>> {
    check_uniform(pop)?;
    let n = pop.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let a = pop[i].as_ref();
        for j in (i + 1)..n {
            let b = pop[j].as_ref();
            if dominates_unchecked(a, b) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_unchecked(b, a) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut fronts = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(Front {
            rank: fronts.len(),
            members: current,
        });
        current = next;
    }
    Ok(fronts)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Crowding distance of every member of `front`.
///
/// Boundary members on any objective get infinity; interior members
/// accumulate the normalized gap between their neighbours. Objectives with
/// zero spread contribute nothing. Ties on an objective are ordered by the
/// full vector so the result does not depend on member order.
pub fn crowding_distance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n == 0 {
        return distance;
    }
    if n <= 2 {
        distance.fill(f64::INFINITY);
        return distance;
    }
    let m = front[0].as_ref().len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| {
            let (va, vb) = (front[a].as_ref(), front[b].as_ref());
            va[k].total_cmp(&vb[k]).then_with(|| lexicographic(va, vb))
        });
        let lo = front[order[0]].as_ref()[k];
        let hi = front[order[n - 1]].as_ref()[k];
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let spread = hi - lo;
        if spread <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let prev = front[order[w - 1]].as_ref()[k];
            let next = front[order[w + 1]].as_ref()[k];
            distance[order[w]] += (next - prev) / spread;
        }
    }
    distance
}

/// Front rank and within-front crowding distance of every individual.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
}

impl Ranking {
    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }
}

pub fn rank_population<V: AsRef<[f64]>>(pop: &[V]) -> Result<Ranking> {
    let fronts = fast_nondominated_sort(pop)?;
    let mut rank = vec![0; pop.len()];
    let mut crowding = vec![0.0; pop.len()];
    for front in &fronts {
        let members: Vec<&[f64]> = front.members.iter().map(|&i| pop[i].as_ref()).collect();
        for (&i, d) in front.members.iter().zip(crowding_distance(&members)) {
            rank[i] = front.rank;
            crowding[i] = d;
        }
    }
    Ok(Ranking { rank, crowding })
}

/// Fronts admitted whole, plus the front that has to be truncated (if any).
pub(crate) fn split_fronts(fronts: Vec<Front>, n: usize) -> (Vec<usize>, Option<Vec<usize>>) {
    let mut admitted = Vec::with_capacity(n);
    for front in fronts {
        if admitted.len() + front.members.len() <= n {
            admitted.extend(front.members);
            if admitted.len() == n {
                break;
            }
        } else {
            return (admitted, Some(front.members));
        }
    }
    (admitted, None)
}

pub(crate) fn check_survivor_count(pool: usize, n: usize) -> Result<()> {
    if pool < n {
        return Err(Error::usage(format!(
            "cannot select {n} survivors from a pool of {pool}"
        )));
    }
    Ok(())
}

/// Elitist NSGA-II environmental selection of `n` pool indices.
pub fn nsga2_survivor_select<V: AsRef<[f64]>, R: Rng + ?Sized>(
    pool: &[V],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_survivor_count(pool.len(), n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == pool.len() {
        return Ok((0..n).collect());
    }
    let fronts = fast_nondominated_sort(pool)?;
    let (mut selected, straddling) = split_fronts(fronts, n);
    if let Some(mut last) = straddling {
        let vectors: Vec<&[f64]> = last.iter().map(|&i| pool[i].as_ref()).collect();
        let crowd = crowding_distance(&vectors);
        let mut order: Vec<usize> = (0..last.len()).collect();
        order.shuffle(rng);
        // stable sort keeps the random order among equal distances
        order.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]));
        let missing = n - selected.len();
        last = order[..missing].iter().map(|&k| last[k]).collect();
        selected.extend(last);
    }
    Ok(selected)
}

/// Binary tournament: lower rank wins, then larger crowding, then a coin flip.
pub fn nsga2_parent_tournament<R: Rng + ?Sized>(ranking: &Ranking, rng: &mut R) -> usize {
    assert!(!ranking.is_empty(), "tournament over an empty population");
    let a = rng.random_range(0..ranking.len());
    let b = rng.random_range(0..ranking.len());
    match ranking.rank[a].cmp(&ranking.rank[b]) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => match ranking.crowding[a].total_cmp(&ranking.crowding[b]) {
            Ordering::Greater => a,
            Ordering::Less => b,
            Ordering::Equal => {
                if rng.random_bool(0.5) {
                    a
                } else {
                    b
                }
            }
        },
    }
}
