use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nsga2::{check_survivor_count, check_uniform, fast_nondominated_sort, split_fronts};
use crate::error::{Error, Result};

/// Replacement for zero weights in the achievement scalarizing function.
pub const ASF_ZERO_WEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Max,
    Intercept,
}

/// Achievement scalarizing function `max_i x_i / w_i`, zero weights
/// replaced by a small constant.
pub fn asf(x: &[f64], w: &[f64]) -> f64 {
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| xi / if wi == 0.0 { ASF_ZERO_WEIGHT } else { wi })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn shifted<V: AsRef<[f64]>>(pool: &[V], m: usize) -> Vec<Vec<f64>> {
    let mut min = vec![f64::INFINITY; m];
    for v in pool {
        for (lo, &x) in min.iter_mut().zip(v.as_ref()) {
            *lo = lo.min(x);
        }
    }
    pool.iter()
        .map(|v| v.as_ref().iter().zip(&min).map(|(x, lo)| x - lo).collect())
        .collect()
}

fn divide_by_max(shifted: &mut [Vec<f64>], m: usize) {
    for k in 0..m {
        let hi = shifted.iter().map(|v| v[k]).fold(0.0, f64::max);
        for v in shifted.iter_mut() {
            v[k] = if hi > 0.0 { v[k] / hi } else { 0.0 };
        }
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                for (x, &p) in lower[0][col..n].iter_mut().zip(&upper[col][col..n]) {
                    *x -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn intercepts(shifted: &[Vec<f64>], m: usize) -> Option<Vec<f64>> {
    let mut extremes = Vec::with_capacity(m);
    for axis in 0..m {
        let w: Vec<f64> = (0..m).map(|k| if k == axis { 1.0 } else { 0.0 }).collect();
        let best = (0..shifted.len())
            .min_by(|&a, &b| asf(&shifted[a], &w).total_cmp(&asf(&shifted[b], &w)))?;
        if extremes.contains(&best) {
            return None;
        }
        extremes.push(best);
    }
    let a = extremes.iter().map(|&i| shifted[i].clone()).collect();
    let plane = solve(a, vec![1.0; m])?;
    let icpt: Vec<f64> = plane.iter().map(|&p| 1.0 / p).collect();
    icpt.iter()
        .all(|&v| v.is_finite() && v > 1e-10)
        .then_some(icpt)
}

/// Normalizes objective vectors and reports the mode actually applied.
pub fn nsga3_normalize_with_mode<V: AsRef<[f64]>>(
    pool: &[V],
    mode: Normalization,
) -> Result<(Vec<Vec<f64>>, Normalization)> {
    let m = check_uniform(pool)?;
    let mut s = shifted(pool, m);
    if mode == Normalization::Intercept {
        if let Some(icpt) = intercepts(&s, m) {
            for v in &mut s {
                for (x, a) in v.iter_mut().zip(&icpt) {
                    *x /= a;
                }
            }
            return Ok((s, Normalization::Intercept));
        }
    }
    divide_by_max(&mut s, m);
    Ok((s, Normalization::Max))
}

pub fn nsga3_normalize<V: AsRef<[f64]>>(pool: &[V], mode: Normalization) -> Result<Vec<Vec<f64>>> {
    nsga3_normalize_with_mode(pool, mode).map(|(v, _)| v)
}

/// Reference directions on the unit simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLineSet {
    pub divisions: usize,
    pub lines: Vec<Vec<f64>>,
}

impl ReferenceLineSet {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn objectives(&self) -> usize {
        self.lines.first().map_or(0, Vec::len)
    }
}

/// `C(h + m - 1, m - 1)`, saturating.
pub fn lattice_size(m: usize, h: usize) -> u128 {
    let k = (m - 1) as u128;
    let mut c: u128 = 1;
    for i in 1..=k {
        c = match c.checked_mul(h as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    c
}

fn compositions(h: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
    if prefix.len() == m - 1 {
        let used: usize = prefix.iter().sum();
        let mut line: Vec<f64> = prefix.iter().map(|&p| p as f64 / h as f64).collect();
        line.push((h - used) as f64 / h as f64);
        out.push(line);
        return;
    }
    let used: usize = prefix.iter().sum();
    for p in (0..=h - used).rev() {
        prefix.push(p);
        compositions(h, m, prefix, out);
        prefix.pop();
    }
}

pub fn reference_lines(m: usize, target_count: usize) -> Result<ReferenceLineSet> {
    if m < 2 || target_count == 0 {
        return Err(Error::usage(format!(
            "reference lines need m >= 2 and a positive target (got m = {m}, target = {target_count})"
        )));
    }
    let target = target_count as u128;
    let mut h = 1;
    while lattice_size(m, h) < target {
        h += 1;
    }
    if h > 1 && target - lattice_size(m, h - 1) <= lattice_size(m, h) - target {
        h -= 1;
    }
    let mut lines = Vec::new();
    compositions(h, m, &mut Vec::with_capacity(m), &mut lines);
    if h % m != 0 {
        lines.push(vec![1.0 / m as f64; m]);
    }
    Ok(ReferenceLineSet {
        divisions: h,
        lines,
    })
}

/// Distance from `p` to the line through the origin along `w`.
pub fn perpendicular_distance(p: &[f64], w: &[f64]) -> f64 {
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let pw: f64 = p.iter().zip(w).map(|(a, b)| a * b).sum();
    let t = pw / ww;
    p.iter()
        .zip(w)
        .map(|(a, b)| (a - t * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Picks `slots` members of `front` by reference-line niching.
fn niche<R: Rng + ?Sized>(
    normalized: &[Vec<f64>],
    lines: &ReferenceLineSet,
    slots: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut members: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lines.len()];
    for (i, p) in normalized.iter().enumerate() {
        let (line, d) = lines
            .lines
            .iter()
            .map(|w| perpendicular_distance(p, w))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("reference line set is non-empty");
        members[line].push((i, d));
    }
    let mut count = vec![0usize; lines.len()];
    let mut chosen = Vec::with_capacity(slots);

    let mut first: Vec<usize> = (0..lines.len())
        .filter(|&l| !members[l].is_empty())
        .collect();
    first.shuffle(rng);
    for l in first {
        if chosen.len() == slots {
            return chosen;
        }
        let best = members[l].iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        let ties: Vec<usize> = (0..members[l].len())
            .filter(|&k| members[l][k].1 == best)
            .collect();
        let k = ties[rng.random_range(0..ties.len())];
        chosen.push(members[l].swap_remove(k).0);
        count[l] += 1;
    }

    while chosen.len() < slots {
        let mut open: Vec<usize> = (0..lines.len())
            .filter(|&l| !members[l].is_empty())
            .collect();
        open.shuffle(rng);
        open.sort_by_key(|&l| count[l]);
        for l in open {
            if chosen.len() == slots {
                break;
            }
            let k = rng.random_range(0..members[l].len());
            chosen.push(members[l].swap_remove(k).0);
            count[l] += 1;
        }
    }
    chosen
}

/// NSGA-III environmental selection of `n` pool indices.
pub fn nsga3_survivor_select<V: AsRef<[f64]>, R: Rng + ?Sized>(
    pool: &[V],
    n: usize,
    lines: &ReferenceLineSet,
    normalization: Normalization,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_survivor_count(pool.len(), n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == pool.len() {
        return Ok((0..n).collect());
    }
    let m = check_uniform(pool)?;
    if lines.objectives() != m {
        return Err(Error::LengthMismatch {
            left: lines.objectives(),
            right: m,
        });
    }
    let fronts = fast_nondominated_sort(pool)?;
    let (mut selected, straddling) = split_fronts(fronts, n);
    if let Some(last) = straddling {
        let vectors: Vec<&[f64]> = last.iter().map(|&i| pool[i].as_ref()).collect();
        let normalized = nsga3_normalize(&vectors, normalization)?;
        let picks = niche(&normalized, lines, n - selected.len(), rng);
        selected.extend(picks.into_iter().map(|k| last[k]));
    }
    Ok(selected)
}
