//! Many-objective evolution for multimodal problems.
//!
//! The crate is organized around the pieces of a full experiment:
//!
//! - [`objectives`]: objective vectors, Pareto dominance and aggregation.
//! - [`neuro`]: directly encoded recurrent networks and their mutation operators.
//! - [`maze`]: maze generation, the differential-drive robot simulator and scoring.
//! - [`moea`]: NSGA-II, NSGA-III and the lexicase selection family.
//! - [`cmoea`]: the bin archive of the combinatorial multi-objective EA.
//! - [`harness`]: run configuration, the generation loop, logs and statistics.
//!
//! Every stochastic operation takes an explicit random stream so that runs are
//! reproducible from a single master seed, see [`rng`].

pub mod cmoea;
pub mod error;
pub mod harness;
pub mod maze;
pub mod moea;
pub mod neuro;
pub mod objectives;
pub mod rng;

pub use error::{Error, Result};
pub use objectives::{
    aggregate, augment_with_ct, combined_target, dominates, Aggregation, BehaviorDescriptor,
    Evaluation, Individual, ObjectiveVector,
};
