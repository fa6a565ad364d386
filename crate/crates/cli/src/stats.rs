//! Treatment comparison over run directories.

use std::path::{Path, PathBuf};

use cmoea_core::harness::{
    bootstrap_median_ci, mann_whitney_u, median, median_filter, significance_bands, LogRow, RunLog,
};
use cmoea_core::rng::seeded;
use serde::Serialize;

use crate::commands::LOG_FILE;
use crate::{print_effective, usage_error, Classify, Outcome, StatsArgs};

/// Run logs directly inside `dir` or one level below it, sorted by path.
fn discover(dir: &Path) -> Outcome<Vec<PathBuf>> {
    let mut found = Vec::new();
    let direct = dir.join(LOG_FILE);
    if direct.is_file() {
        found.push(direct);
    }
    let entries = std::fs::read_dir(dir)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", dir.display()))
        .usage()?;
    for entry in entries {
        let nested = entry.usage()?.path().join(LOG_FILE);
        if nested.is_file() {
            found.push(nested);
        }
    }
    found.sort();
    if found.is_empty() {
        return usage_error(format!("no {LOG_FILE} under {}", dir.display()));
    }
    Ok(found)
}

#[derive(Serialize)]
struct TreatmentStats {
    name: String,
    runs: usize,
    median: Vec<f64>,
    ci_low: Vec<f64>,
    ci_high: Vec<f64>,
}

#[derive(Serialize)]
struct Comparison {
    first: String,
    second: String,
    p_values: Vec<f64>,
    positive: Vec<bool>,
    valid: Vec<bool>,
}

#[derive(Serialize)]
struct Report {
    metric: String,
    corrected_alpha: f64,
    required_run: usize,
    checkpoints: Vec<u32>,
    treatment: Vec<TreatmentStats>,
    comparison: Vec<Comparison>,
}

fn metric_of(row: &LogRow, metric: &str) -> Option<f64> {
    match metric {
        "train" => Some(row.best_train_perf),
        _ => row.test_perf,
    }
}

/// Per run, the metric at every checkpoint generation.
fn series(
    logs: &[(PathBuf, RunLog)],
    checkpoints: &[u32],
    args: &StatsArgs,
) -> Outcome<Vec<Vec<f64>>> {
    logs.iter()
        .map(|(path, log)| {
            let values = checkpoints
                .iter()
                .map(|&g| {
                    let row = log.rows.iter().find(|r| r.generation == g);
                    match row.and_then(|r| metric_of(r, &args.metric)) {
                        Some(v) => Ok(v),
                        None => usage_error(format!(
                            "{} has no {} value at generation {g}",
                            path.display(),
                            args.metric
                        )),
                    }
                })
                .collect::<Outcome<Vec<f64>>>()?;
            median_filter(&values, args.smooth).usage()
        })
        .collect()
}

pub fn run(args: &StatsArgs) -> Outcome {
    print_effective("stats", args)?;
    if args.checkpoint_every == 0 {
        return usage_error("--checkpoint-every must be at least 1");
    }
    let mut groups = Vec::new();
    let mut last_generation = None;
    for dir in &args.runs {
        let mut logs = Vec::new();
        for path in discover(dir)? {
            let log = RunLog::load(&path).usage()?;
            let Some(last) = log.last().map(|r| r.generation) else {
                return usage_error(format!("{} is empty", path.display()));
            };
            match last_generation {
                None => last_generation = Some((last, path.clone())),
                Some((g, ref first)) if g != last => {
                    return usage_error(format!(
                        "mismatched generation counts: {} ends at {g}, {} at {last}",
                        first.display(),
                        path.display()
                    ))
                }
                _ => {}
            }
            logs.push((path, log));
        }
        groups.push((dir.clone(), logs));
    }
    let last = last_generation.expect("at least one run").0;
    let checkpoints: Vec<u32> = (0..=last).step_by(args.checkpoint_every as usize).collect();

    let mut rng = seeded(args.seed);
    let mut treatments = Vec::new();
    let mut values = Vec::new();
    for (dir, logs) in &groups {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        if logs.len() == 1 {
            log::warn!(
                "{name} has a single run; its confidence intervals collapse to the point value"
            );
        }
        let runs = series(logs, &checkpoints, args)?;
        // transpose to per-checkpoint samples
        let per_checkpoint: Vec<Vec<f64>> = (0..checkpoints.len())
            .map(|c| runs.iter().map(|r| r[c]).collect())
            .collect();
        let mut stats = TreatmentStats {
            name,
            runs: logs.len(),
            median: Vec::new(),
            ci_low: Vec::new(),
            ci_high: Vec::new(),
        };
        for sample in &per_checkpoint {
            stats.median.push(median(sample).runtime()?);
            let (lo, hi) =
                bootstrap_median_ci(sample, args.resamples, args.level, &mut rng).usage()?;
            stats.ci_low.push(lo);
            stats.ci_high.push(hi);
        }
        treatments.push(stats);
        values.push(per_checkpoint);
    }

    let mut comparisons = Vec::new();
    let (mut corrected_alpha, mut required_run) = (args.alpha / groups.len() as f64, 0);
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let p_values = values[i]
                .iter()
                .zip(&values[j])
                .map(|(a, b)| mann_whitney_u(a, b).map(|r| r.p))
                .collect::<Result<Vec<_>, _>>()
                .runtime()?;
            let bands = significance_bands(&p_values, args.alpha, groups.len()).usage()?;
            corrected_alpha = bands.corrected_alpha;
            required_run = bands.required_run;
            comparisons.push(Comparison {
                first: treatments[i].name.clone(),
                second: treatments[j].name.clone(),
                p_values,
                positive: bands.positive,
                valid: bands.valid,
            });
        }
    }
    let report = Report {
        metric: args.metric.clone(),
        corrected_alpha,
        required_run,
        checkpoints,
        treatment: treatments,
        comparison: comparisons,
    };
    print!("{}", toml::to_string(&report).runtime()?);
    Ok(())
}
