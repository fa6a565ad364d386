use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::log::RunLog;
use crate::cmoea::{Bin, BinArchive, Member, WithinBinSelector};
use crate::error::{Error, Result};
use crate::neuro::NetworkGenome;
use crate::objectives::{Aggregation, Evaluation, Individual, ObjectiveVector};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// The evolving state of any treatment.
#[derive(Debug, Clone)]
pub enum Population {
    Archive(BinArchive),
    Flat {
        members: Vec<Individual>,
        next_id: u64,
    },
}

impl Population {
    /// Distinct individuals, ordered by id.
    pub fn individuals(&self) -> Vec<&Individual> {
        match self {
            Population::Archive(a) => a.unique_individuals(),
            Population::Flat { members, .. } => {
                let mut v: Vec<&Individual> = members.iter().collect();
                v.sort_by_key(|i| i.id);
                v
            }
        }
    }

    /// Number of occupied slots (archive copies counted separately).
    pub fn size(&self) -> usize {
        match self {
            Population::Archive(a) => a.population_size(),
            Population::Flat { members, .. } => members.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoredIndividual {
    id: u64,
    birth_generation: u32,
    genome: NetworkGenome,
    evaluation: Evaluation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoredBin {
    subtasks: Vec<usize>,
    is_dynamic: bool,
    aggregation: Aggregation,
    members: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum StoredState {
    Archive {
        bin_size: usize,
        subtask_count: usize,
        selector: WithinBinSelector,
        next_id: u64,
        bins: Vec<StoredBin>,
    },
    Population {
        next_id: u64,
        members: Vec<u64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoredCheckpoint {
    format_version: u32,
    config: RunConfig,
    generation: u32,
    log: RunLog,
    individuals: Vec<StoredIndividual>,
    state: StoredState,
}

/// Complete run state after `generation`, enough to resume bit-exactly.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub generation: u32,
    pub log: RunLog,
    pub population: Population,
}

fn format_error(reason: impl Into<String>) -> Error {
    Error::Format {
        what: "checkpoint",
        reason: reason.into(),
    }
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        let individuals = self
            .population
            .individuals()
            .into_iter()
            .map(|i| {
                Ok(StoredIndividual {
                    id: i.id,
                    birth_generation: i.birth_generation,
                    genome: (*i.genome).clone(),
                    evaluation: i.evaluated()?.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let state = match &self.population {
            Population::Archive(a) => StoredState::Archive {
                bin_size: a.bin_size,
                subtask_count: a.subtask_count,
                selector: a.selector,
                next_id: a.next_id,
                bins: a
                    .bins
                    .iter()
                    .map(|b| StoredBin {
                        subtasks: b.subtasks.clone(),
                        is_dynamic: b.is_dynamic,
                        aggregation: b.aggregation,
                        members: b.members.iter().map(|m| m.individual.id).collect(),
                    })
                    .collect(),
            },
            Population::Flat { members, next_id } => StoredState::Population {
                next_id: *next_id,
                members: members.iter().map(|m| m.id).collect(),
            },
        };
        let stored = StoredCheckpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            config: self.config.clone(),
            generation: self.generation,
            log: self.log.clone(),
            individuals,
            state,
        };
        serde_json::to_string(&stored).map_err(|e| format_error(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let stored: StoredCheckpoint =
            serde_json::from_str(text).map_err(|e| format_error(e.to_string()))?;
        if stored.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(format_error(format!(
                "unsupported format version {}",
                stored.format_version
            )));
        }
        let mut table = BTreeMap::new();
        for s in stored.individuals {
            let objectives = ObjectiveVector::new(s.evaluation.objectives.into_inner())?;
            let evaluation = Evaluation {
                objectives,
                ..s.evaluation
            };
            let ind = Individual {
                id: s.id,
                genome: Arc::new(s.genome),
                birth_generation: s.birth_generation,
                evaluation: Some(Arc::new(evaluation)),
            };
            if table.insert(s.id, ind).is_some() {
                return Err(format_error(format!("duplicate individual {}", s.id)));
            }
        }
        let lookup = |id: &u64| {
            table
                .get(id)
                .cloned()
                .ok_or_else(|| format_error(format!("unknown individual {id}")))
        };
        let population = match stored.state {
            StoredState::Archive {
                bin_size,
                subtask_count,
                selector,
                next_id,
                bins,
            } => {
                let bins = bins
                    .into_iter()
                    .map(|b| {
                        let mut bin = Bin::new(b.subtasks, b.is_dynamic, b.aggregation);
                        bin.members = b
                            .members
                            .iter()
                            .map(|id| {
                                Ok(Member {
                                    individual: lookup(id)?,
                                    aggregate: 0.0,
                                    diversity: 0.0,
                                })
                            })
                            .collect::<Result<_>>()?;
                        bin.refresh()?;
                        Ok(bin)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Population::Archive(BinArchive {
                    bins,
                    bin_size,
                    subtask_count,
                    selector,
                    next_id,
                })
            }
            StoredState::Population { next_id, members } => Population::Flat {
                members: members.iter().map(lookup).collect::<Result<_>>()?,
                next_id,
            },
        };
        Ok(Self {
            config: stored.config,
            generation: stored.generation,
            log: stored.log,
            population,
        })
    }

    /// Writes atomically: a temporary file next to `path` is renamed over it.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json()?).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
