//! Experiment orchestration: configuration, the generation loop with its
//! train/test schedule, run logs, checkpoints and the statistics used to
//! compare treatments.

mod checkpoint;
mod config;
mod log;
mod run;
pub mod stats;

pub use checkpoint::{Checkpoint, Population, CHECKPOINT_FORMAT_VERSION};
pub use config::{cmoea_bin_count, MazeSetConfig, RunConfig, Treatment};
pub use log::{LogRow, RunLog, LOG_HEADER};
pub use run::{
    evaluate_individual, run_experiment, run_experiment_with, GenerationReport, RunOptions,
    RunOutcome, CHECKPOINT_FILE,
};
pub use stats::{
    bootstrap_median_ci, mann_whitney_u, median, median_filter, significance_bands, MannWhitney,
    SignificanceBands,
};
