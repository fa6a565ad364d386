use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cmoea::{WithinBinSelector, MAX_EXHAUSTIVE_SUBTASKS};
use crate::error::{Error, Result};
use crate::moea::{LexicaseConfig, Normalization};
use crate::neuro::{InitConfig, MutationConfig};
use crate::objectives::Aggregation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Treatment {
    #[default]
    Cmoea,
    CmoeaSingleBin,
    Nsga2,
    Nsga3,
    Lexicase,
}

impl Treatment {
    pub fn is_cmoea(self) -> bool {
        matches!(self, Treatment::Cmoea | Treatment::CmoeaSingleBin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MazeSetConfig {
    pub count: usize,
    pub seed: u64,
}

/// Everything that determines a run. Zero-valued sizes are derived from
/// the rest of the configuration, see [`RunConfig::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub treatment: Treatment,
    /// Adds the combined-target objective (non-CMOEA treatments only).
    pub ct_augmented: bool,
    /// Adds mean behavioral distance to the rest of the pool as an
    /// objective (non-CMOEA treatments only).
    pub diversity_objective: bool,
    pub master_seed: u64,
    pub generations: u32,
    pub offspring_per_generation: usize,
    /// Population of the non-CMOEA treatments and of the single bin;
    /// 0 means the total size of the CMOEA archive.
    pub population_size: usize,
    /// Random individuals created before the first generation; 0 means the
    /// offspring count for CMOEA and the population size otherwise.
    pub initial_population: usize,
    pub bin_size: usize,
    /// Maximum number of bins; 0 means one bin per subtask combination.
    pub bin_cap: usize,
    pub aggregation: Aggregation,
    pub within_bin: WithinBinSelector,
    pub lexicase: LexicaseConfig,
    pub nsga3: Normalization,
    /// Generations between test-set evaluations of the training champion.
    pub test_interval: u32,
    /// Generations between checkpoints.
    pub checkpoint_interval: u32,
    /// Worker threads; 0 uses every available core.
    pub worker_count: usize,
    /// Fills the `wall_ms` log column, which makes logs differ run to run.
    pub record_wall_time: bool,
    pub training_mazes: MazeSetConfig,
    pub test_mazes: MazeSetConfig,
    pub mutation: MutationConfig,
    pub init: InitConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            treatment: Treatment::Cmoea,
            ct_augmented: false,
            diversity_objective: false,
            master_seed: 0,
            generations: 1000,
            offspring_per_generation: 1000,
            population_size: 0,
            initial_population: 0,
            bin_size: 10,
            bin_cap: 1000,
            aggregation: Aggregation::Mean,
            within_bin: WithinBinSelector::Nsga2,
            lexicase: LexicaseConfig::default(),
            nsga3: Normalization::Max,
            test_interval: 100,
            checkpoint_interval: 100,
            worker_count: 0,
            record_wall_time: false,
            training_mazes: MazeSetConfig {
                count: 100,
                seed: 1,
            },
            test_mazes: MazeSetConfig {
                count: 1000,
                seed: 2,
            },
            mutation: MutationConfig::default(),
            init: InitConfig::default(),
        }
    }
}

/// Number of CMOEA bins for `m` subtasks under `cap` (0 = uncapped).
pub fn cmoea_bin_count(m: usize, cap: usize) -> Result<usize> {
    let full = (m <= MAX_EXHAUSTIVE_SUBTASKS).then(|| (1usize << m) - 1);
    match (cap, full) {
        (0, Some(full)) => Ok(full),
        (0, None) => Err(Error::Config(format!(
            "{m} training mazes need a bin cap; at most {MAX_EXHAUSTIVE_SUBTASKS} subtasks can be enumerated"
        ))),
        (c, Some(full)) => Ok(c.min(full)),
        (c, None) => Ok(c),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Total number of archive slots of the CMOEA treatment for this config.
    pub fn cmoea_population(&self) -> Result<usize> {
        Ok(cmoea_bin_count(self.training_mazes.count, self.bin_cap)? * self.bin_size)
    }

    /// Checks the invariants and fills in derived sizes.
    pub fn resolved(&self) -> Result<Self> {
        self.validate()?;
        let mut cfg = self.clone();
        if cfg.population_size == 0 {
            cfg.population_size = self.cmoea_population()?;
        }
        if cfg.initial_population == 0 {
            cfg.initial_population = match cfg.treatment {
                Treatment::Cmoea => cfg.offspring_per_generation,
                _ => cfg.population_size,
            };
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let m = self.training_mazes.count;
        if m == 0 {
            return bad("training_mazes.count must be at least 1".into());
        }
        if self.test_mazes.count == 0 {
            return bad("test_mazes.count must be at least 1".into());
        }
        if self.offspring_per_generation == 0 {
            return bad("offspring_per_generation must be at least 1".into());
        }
        if self.bin_size == 0 {
            return bad("bin_size must be at least 1".into());
        }
        if self.test_interval == 0 || self.checkpoint_interval == 0 {
            return bad("test_interval and checkpoint_interval must be at least 1".into());
        }
        if self.treatment == Treatment::Cmoea && self.bin_cap != 0 && self.bin_cap < m + 1 {
            return bad(format!(
                "bin_cap {} is below the minimum of {} for {m} training mazes",
                self.bin_cap,
                m + 1
            ));
        }
        if self.treatment.is_cmoea() && (self.ct_augmented || self.diversity_objective) {
            log::warn!("ct_augmented and diversity_objective have no effect on CMOEA treatments");
        }
        if self.population_size == 0 {
            self.cmoea_population()?;
        }
        if self.treatment == Treatment::Nsga3 && self.objective_count() < 2 {
            return bad("nsga3 needs at least two objectives".into());
        }
        self.mutation.validate()?;
        self.init.validate()?;
        self.lexicase.validate()?;
        Ok(())
    }

    /// Length of the objective vectors the selection operators see.
    pub fn objective_count(&self) -> usize {
        let mut m = self.training_mazes.count;
        if !self.treatment.is_cmoea() {
            m += usize::from(self.ct_augmented) + usize::from(self.diversity_objective);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn derived_sizes() {
        let cfg = RunConfig::default().resolved().unwrap();
        assert_eq!(cfg.population_size, 10_000);
        assert_eq!(cfg.initial_population, 1000);

        let small = RunConfig {
            training_mazes: MazeSetConfig { count: 10, seed: 1 },
            bin_cap: 0,
            bin_size: 4,
            ..RunConfig::default()
        };
        assert_eq!(small.cmoea_population().unwrap(), 4092);
        let nsga = RunConfig {
            treatment: Treatment::Nsga2,
            ..small.clone()
        };
        assert_eq!(nsga.resolved().unwrap().initial_population, 4092);
        let capped = RunConfig {
            bin_cap: 50,
            bin_size: 5,
            ..small
        };
        assert_eq!(capped.cmoea_population().unwrap(), 250);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        assert!(RunConfig::from_toml("treatment = \"nsga4\"").is_err());
        let cfg = RunConfig {
            bin_cap: 50,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            bin_cap: 0,
            ..RunConfig::default()
        };
        assert!(cfg.resolved().is_err());
        let cfg = RunConfig {
            offspring_per_generation: 0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::from_toml("[mutation]\nadd_connection = 1.5").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn objective_counts() {
        let mut cfg = RunConfig {
            treatment: Treatment::Nsga2,
            ct_augmented: true,
            diversity_objective: true,
            ..RunConfig::default()
        };
        assert_eq!(cfg.objective_count(), 102);
        cfg.treatment = Treatment::Cmoea;
        assert_eq!(cfg.objective_count(), 100);
    }
}
