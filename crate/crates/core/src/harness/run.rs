use std::any::Any;
use std::panic::AssertUnwindSafe;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::checkpoint::{Checkpoint, Population};
use super::config::{RunConfig, Treatment};
use super::log::{LogRow, RunLog};
use crate::cmoea::{breed, cmoea_generation, init_bins, single_bin_archive, GenerationContext};
use crate::error::{Error, Result};
use crate::maze::{behavior_descriptor, manhattan, performance, simulate, Maze, MazeSet};
use crate::moea::{
    lexicase_select, lexicase_survivor_select, nsga2_parent_tournament, nsga2_survivor_select,
    nsga3_survivor_select, rank_population, reference_lines, ReferenceLineSet,
};
use crate::neuro::{random_genome, NetworkGenome};
use crate::objectives::{combined_target, Evaluation, Individual, ObjectiveVector};
use crate::rng::Streams;

/// File name of the rolling checkpoint inside the checkpoint directory.
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Simulates `genome` on every maze and collects scores, final positions
/// and the number of solved mazes.
pub fn evaluate_individual(genome: &NetworkGenome, mazes: &[Maze]) -> Result<Evaluation> {
    let outcomes = mazes
        .par_iter()
        .map(|m| simulate(m, genome))
        .collect::<Result<Vec<_>>>()?;
    let scores = mazes
        .iter()
        .zip(&outcomes)
        .map(|(m, o)| performance(m, o))
        .collect();
    Ok(Evaluation {
        objectives: ObjectiveVector::new(scores)?,
        descriptor: behavior_descriptor(&outcomes, mazes.len())?,
        solved: outcomes.iter().filter(|o| o.solved).count(),
    })
}

fn panic_message(payload: &(dyn Any + Send)) -> String {
    let text = payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown cause".into());
    format!("panic during evaluation: {text}")
}

/// Summary handed to the observer after initialization and every generation.
#[derive(Debug, Clone)]
pub struct GenerationReport {
    pub generation: u32,
    pub best_train_perf: f64,
    pub train_solved: usize,
    pub champion_id: u64,
    /// Ids of every distinct individual in the population, ascending.
    pub population_ids: Vec<u64>,
    /// Occupied slots; archive copies count once per bin.
    pub population_size: usize,
    pub reassigned_bin: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub log: RunLog,
    pub champion: Individual,
    pub population_size: usize,
}

/// Optional behavior of [`run_experiment_with`].
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Directory for the rolling checkpoint; none disables checkpoints.
    pub checkpoint_dir: Option<PathBuf>,
    /// Continue from this state instead of initializing.
    pub resume: Option<Checkpoint>,
    /// Skips every test-set evaluation; selection never sees test results,
    /// so the evolutionary trajectory is unchanged.
    pub skip_test_evaluation: bool,
    pub observer: Option<&'a mut (dyn FnMut(&GenerationReport) + Send)>,
    /// Test hook: the evaluator panics during this generation.
    #[doc(hidden)]
    pub fault_at_generation: Option<u32>,
}

/// Runs `cfg` to completion.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutcome> {
    run_experiment_with(cfg, RunOptions::default())
}

pub fn run_experiment_with(cfg: &RunConfig, options: RunOptions<'_>) -> Result<RunOutcome> {
    let cfg = cfg.resolved()?;
    if let Some(cp) = &options.resume {
        let mut stored = cp.config.clone();
        stored.generations = cfg.generations;
        stored.worker_count = cfg.worker_count;
        if stored != cfg {
            return Err(Error::Config(
                "checkpoint was written by a different configuration".into(),
            ));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.worker_count)))?;
    let RunOptions {
        checkpoint_dir,
        resume,
        skip_test_evaluation,
        mut observer,
        fault_at_generation,
    } = options;
    pool.install(|| {
        let mut runner = Runner::new(cfg, checkpoint_dir, skip_test_evaluation)?;
        runner.fault = fault_at_generation;
        runner.run(resume, &mut observer)
    })
}

struct Runner {
    cfg: RunConfig,
    streams: Streams,
    training: Vec<Maze>,
    test: Vec<Maze>,
    lines: Option<ReferenceLineSet>,
    checkpoint_dir: Option<PathBuf>,
    skip_test: bool,
    fault: Option<u32>,
    started: Instant,
}

type Observer<'a> = Option<&'a mut (dyn FnMut(&GenerationReport) + Send)>;

impl Runner {
    fn new(cfg: RunConfig, checkpoint_dir: Option<PathBuf>, skip_test: bool) -> Result<Self> {
        let training =
            MazeSet::generate(cfg.training_mazes.count, cfg.training_mazes.seed)?.mazes();
        let test = if skip_test {
            Vec::new()
        } else {
            MazeSet::generate(cfg.test_mazes.count, cfg.test_mazes.seed)?.mazes()
        };
        let lines = match cfg.treatment {
            Treatment::Nsga3 => Some(reference_lines(cfg.objective_count(), cfg.population_size)?),
            _ => None,
        };
        Ok(Self {
            streams: Streams::new(cfg.master_seed),
            cfg,
            training,
            test,
            lines,
            checkpoint_dir,
            skip_test,
            fault: None,
            started: Instant::now(),
        })
    }

    fn evaluate(&self, generation: u32, genome: &NetworkGenome) -> Result<Evaluation> {
        if self.fault == Some(generation) {
            panic!("injected evaluator fault in generation {generation}");
        }
        evaluate_individual(genome, &self.training)
    }

    fn initialize(&self) -> Result<Population> {
        let cfg = &self.cfg;
        let initial = (0..cfg.initial_population)
            .into_par_iter()
            .map(|i| {
                let mut rng = self.streams.stream("init", &[i as u64]);
                let genome = random_genome(&mut rng, &cfg.init);
                let evaluation = self.evaluate(0, &genome)?;
                Ok(Individual::new(i as u64, genome, 0).with_evaluation(evaluation))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = cfg.training_mazes.count;
        match cfg.treatment {
            Treatment::Cmoea | Treatment::CmoeaSingleBin => {
                let mut archive = if cfg.treatment == Treatment::Cmoea {
                    let cap = (cfg.bin_cap != 0).then_some(cfg.bin_cap);
                    let mut rng = self.streams.stream("bins", &[]);
                    init_bins(m, cap, cfg.bin_size, cfg.aggregation, &mut rng)?
                } else {
                    single_bin_archive(m, cfg.population_size, cfg.aggregation)?
                }
                .with_selector(cfg.within_bin);
                archive.seed(&initial, &self.streams)?;
                Ok(Population::Archive(archive))
            }
            _ => {
                let next_id = initial.len() as u64;
                let members = if initial.len() > cfg.population_size {
                    let objectives = self.objective_vectors(&initial)?;
                    let mut rng = self.streams.stream("select", &[0]);
                    let keep = self.survivors(&objectives, &mut rng)?;
                    keep.into_iter().map(|k| initial[k].clone()).collect()
                } else {
                    initial
                };
                Ok(Population::Flat { members, next_id })
            }
        }
    }

    /// Objective vectors seen by the non-CMOEA selection operators.
    fn objective_vectors(&self, inds: &[Individual]) -> Result<Vec<Vec<f64>>> {
        let evals = inds
            .iter()
            .map(Individual::evaluated)
            .collect::<Result<Vec<_>>>()?;
        let diversity = if self.cfg.diversity_objective {
            let n = evals.len();
            let mut sums = vec![0.0; n];
            for i in 0..n {
                for j in i + 1..n {
                    let d = manhattan(evals[i].descriptor.values(), evals[j].descriptor.values());
                    sums[i] += d;
                    sums[j] += d;
                }
            }
            let denom = n.saturating_sub(1).max(1) as f64;
            sums.into_iter().map(|s| Some(s / denom)).collect()
        } else {
            vec![None; evals.len()]
        };
        evals
            .iter()
            .zip(diversity)
            .map(|(e, d)| {
                let mut v = e.objectives.scores().to_vec();
                if self.cfg.ct_augmented {
                    v.push(combined_target(e.objectives.scores())?);
                }
                v.extend(d);
                Ok(v)
            })
            .collect()
    }

    fn survivors<R: Rng + ?Sized>(
        &self,
        objectives: &[Vec<f64>],
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        let n = self.cfg.population_size;
        let mut keep = match self.cfg.treatment {
            Treatment::Nsga2 => nsga2_survivor_select(objectives, n, rng)?,
            Treatment::Nsga3 => {
                let lines = self
                    .lines
                    .as_ref()
                    .expect("nsga3 runs carry reference lines");
                nsga3_survivor_select(objectives, n, lines, self.cfg.nsga3, rng)?
            }
            Treatment::Lexicase => {
                lexicase_survivor_select(objectives, n, rng, &self.cfg.lexicase)?
            }
            Treatment::Cmoea | Treatment::CmoeaSingleBin => {
                unreachable!("archive treatments select per bin")
            }
        };
        keep.sort_unstable();
        Ok(keep)
    }

    fn flat_generation(
        &self,
        members: &mut Vec<Individual>,
        next_id: &mut u64,
        ctx: &GenerationContext<'_>,
    ) -> Result<()> {
        let generation = u64::from(ctx.generation);
        let objectives = self.objective_vectors(members)?;
        let mut rng = self.streams.stream("parents", &[generation]);
        let k = self.cfg.offspring_per_generation;
        let parents: Vec<Individual> = match self.cfg.treatment {
            Treatment::Nsga2 => {
                let ranking = rank_population(&objectives)?;
                (0..k)
                    .map(|_| members[nsga2_parent_tournament(&ranking, &mut rng)].clone())
                    .collect()
            }
            Treatment::Nsga3 => (0..k)
                .map(|_| members[rng.random_range(0..members.len())].clone())
                .collect(),
            Treatment::Lexicase => (0..k)
                .map(|_| {
                    Ok(
                        members[lexicase_select(&objectives, &mut rng, &self.cfg.lexicase)?]
                            .clone(),
                    )
                })
                .collect::<Result<_>>()?,
            Treatment::Cmoea | Treatment::CmoeaSingleBin => {
                unreachable!("archive treatments breed per archive")
            }
        };
        let evaluator = |g: &NetworkGenome| self.evaluate(ctx.generation, g);
        let children = breed(&parents, *next_id, ctx, &evaluator)?;
        let mut pool = members.clone();
        pool.extend(children);
        let objectives = self.objective_vectors(&pool)?;
        let keep = self.survivors(
            &objectives,
            &mut self.streams.stream("select", &[generation]),
        )?;
        *members = keep.into_iter().map(|i| pool[i].clone()).collect();
        *next_id += k as u64;
        Ok(())
    }

    /// Applies one generation; on error `population` is unchanged.
    fn step(&self, population: &mut Population, generation: u32) -> Result<Option<usize>> {
        let ctx = GenerationContext {
            generation,
            offspring: self.cfg.offspring_per_generation,
            mutation: &self.cfg.mutation,
            streams: &self.streams,
        };
        match population {
            Population::Archive(archive) => {
                let evaluator = |g: &NetworkGenome| self.evaluate(ctx.generation, g);
                Ok(cmoea_generation(archive, &ctx, &evaluator)?.reassigned)
            }
            Population::Flat { members, next_id } => {
                self.flat_generation(members, next_id, &ctx)?;
                Ok(None)
            }
        }
    }

    fn report(
        &self,
        population: &Population,
        generation: u32,
        reassigned_bin: Option<usize>,
    ) -> Result<GenerationReport> {
        let inds = population.individuals();
        let mut best: Option<(f64, &Individual)> = None;
        for ind in &inds {
            let perf = ind.evaluated()?.mean_performance();
            if best.is_none_or(|(b, _)| perf > b) {
                best = Some((perf, ind));
            }
        }
        let (best_train_perf, champion) =
            best.ok_or_else(|| Error::Evaluation("empty population".into()))?;
        Ok(GenerationReport {
            generation,
            best_train_perf,
            train_solved: champion.evaluated()?.solved,
            champion_id: champion.id,
            population_ids: inds.iter().map(|i| i.id).collect(),
            population_size: population.size(),
            reassigned_bin,
        })
    }

    fn champion<'p>(&self, population: &'p Population, id: u64) -> &'p Individual {
        population
            .individuals()
            .into_iter()
            .find(|i| i.id == id)
            .expect("champion comes from the population")
    }

    fn record(
        &self,
        observer: &mut Observer<'_>,
        log: &mut RunLog,
        population: &Population,
        generation: u32,
        reassigned: Option<usize>,
    ) -> Result<()> {
        let report = self.report(population, generation, reassigned)?;
        let (mut test_perf, mut test_solved) = (None, None);
        if !self.skip_test && generation.is_multiple_of(self.cfg.test_interval) {
            let champion = self.champion(population, report.champion_id);
            let e = evaluate_individual(&champion.genome, &self.test)?;
            test_perf = Some(e.mean_performance());
            test_solved = Some(e.solved);
            log::info!(
                "generation {generation}: best training {:.4} ({} solved), champion test {:.4} ({} solved)",
                report.best_train_perf,
                report.train_solved,
                e.mean_performance(),
                e.solved
            );
        }
        log.push(LogRow {
            generation,
            best_train_perf: report.best_train_perf,
            test_perf,
            train_solved: report.train_solved,
            test_solved,
            wall_ms: self
                .cfg
                .record_wall_time
                .then(|| self.started.elapsed().as_millis() as u64),
        });
        if let Some(observer) = observer.as_mut() {
            observer(&report);
        }
        Ok(())
    }

    fn save_checkpoint(
        &self,
        population: &Population,
        generation: u32,
        log: &RunLog,
    ) -> Result<()> {
        if let Some(dir) = &self.checkpoint_dir {
            let cp = Checkpoint {
                config: self.cfg.clone(),
                generation,
                log: log.clone(),
                population: population.clone(),
            };
            cp.save(&dir.join(CHECKPOINT_FILE))?;
        }
        Ok(())
    }

    fn run(self, resume: Option<Checkpoint>, observer: &mut Observer<'_>) -> Result<RunOutcome> {
        let (mut population, mut log, start) = match resume {
            Some(cp) => (cp.population, cp.log, cp.generation),
            None => {
                let population = self.initialize()?;
                let mut log = RunLog::default();
                self.record(observer, &mut log, &population, 0, None)?;
                (population, log, 0)
            }
        };
        if start == 0 {
            self.save_checkpoint(&population, 0, &log)?;
        }
        for generation in start + 1..=self.cfg.generations {
            // the population is only modified once a generation completes, so
            // after a panic it still holds the previous generation
            let stepped = std::panic::catch_unwind(AssertUnwindSafe(|| {
                self.step(&mut population, generation)
            }))
            .unwrap_or_else(|payload| Err(Error::Evaluation(panic_message(payload.as_ref()))));
            let reassigned = match stepped {
                Ok(r) => r,
                Err(e) => {
                    // the population still holds the last completed generation
                    self.save_checkpoint(&population, generation - 1, &log)?;
                    return Err(e);
                }
            };
            self.record(observer, &mut log, &population, generation, reassigned)?;
            if generation % self.cfg.checkpoint_interval == 0 || generation == self.cfg.generations
            {
                self.save_checkpoint(&population, generation, &log)?;
            }
        }
        let report = self.report(&population, self.cfg.generations.max(start), None)?;
        let champion = self.champion(&population, report.champion_id).clone();
        Ok(RunOutcome {
            config: self.cfg,
            log,
            champion,
            population_size: population.size(),
        })
    }
}
