//! `cmoea`: maze generation, evolution runs, evaluation, statistics and
//! trajectory export.

mod commands;
mod stats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmoea_core::harness::Treatment;
use serde::de::IntoDeserializer;
use serde::{Deserialize, Serialize};

/// Exit status plus the error shown to the user.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    error: anyhow::Error,
}

/// Bad flags, configs or input files.
pub const EXIT_USAGE: u8 = 2;
/// Failures after the work has started.
pub const EXIT_RUNTIME: u8 = 1;

pub type Outcome<T = ()> = Result<T, Failure>;

/// Tags an error with the exit code it maps to.
pub trait Classify<T> {
    fn usage(self) -> Outcome<T>;
    fn runtime(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure {
            code: EXIT_USAGE,
            error: e.into(),
        })
    }

    fn runtime(self) -> Outcome<T> {
        self.map_err(|e| Failure {
            code: EXIT_RUNTIME,
            error: e.into(),
        })
    }
}

pub fn usage_error<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure {
        code: EXIT_USAGE,
        error: anyhow::anyhow!(msg.into()),
    })
}

fn parse_treatment(s: &str) -> Result<Treatment, String> {
    Treatment::deserialize(s.into_deserializer()).map_err(|e: serde::de::value::Error| {
        format!("{e}; expected cmoea, cmoea_single_bin, nsga2, nsga3 or lexicase")
    })
}

#[derive(Parser)]
#[command(
    name = "cmoea",
    version,
    about = "Combinatorial multi-objective evolution on maze navigation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a maze set file.
    GenerateMazes(GenerateArgs),
    /// Run one evolutionary experiment.
    Evolve(EvolveArgs),
    /// Score a genome on a maze set, or validate a maze set.
    Evaluate(EvaluateArgs),
    /// Compare treatments across run directories.
    Stats(StatsArgs),
    /// Dump the per-step robot poses of one trial as CSV.
    ExportTrajectory(TrajectoryArgs),
}

#[derive(Args, Serialize)]
pub struct GenerateArgs {
    /// Number of mazes.
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output maze set file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvolveArgs {
    /// Run configuration file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the log, champion, summary and checkpoint.
    #[arg(long, env = "CMOEA_OUT_DIR")]
    pub out: PathBuf,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_treatment)]
    pub treatment: Option<Treatment>,
    #[arg(long)]
    pub generations: Option<u32>,
    #[arg(long)]
    pub offspring: Option<usize>,
    #[arg(long)]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub bin_size: Option<usize>,
    /// Maximum number of CMOEA bins; 0 enumerates every subset.
    #[arg(long)]
    pub bin_cap: Option<usize>,
    #[arg(long)]
    pub training_mazes: Option<usize>,
    #[arg(long)]
    pub training_seed: Option<u64>,
    #[arg(long)]
    pub test_mazes: Option<usize>,
    #[arg(long)]
    pub test_seed: Option<u64>,
    #[arg(long)]
    pub test_interval: Option<u32>,
    #[arg(long)]
    pub checkpoint_interval: Option<u32>,
    /// Append the combined-target objective (non-CMOEA treatments).
    #[arg(long)]
    pub ct_augmented: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "CMOEA_WORKERS")]
    pub workers: Option<usize>,
    /// Continue from the checkpoint in the output directory when present.
    #[arg(long)]
    pub resume: bool,
    /// Record wall-clock milliseconds in the run log.
    #[arg(long)]
    pub wall_time: bool,
    #[arg(long, hide = true)]
    pub fault_at_generation: Option<u32>,
}

#[derive(Args, Serialize)]
pub struct EvaluateArgs {
    /// Genome file to score.
    #[arg(long, required_unless_present = "check_mazes")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genome: Option<PathBuf>,
    /// Maze set file.
    #[arg(long)]
    pub mazes: PathBuf,
    /// Validate every maze: schema, dimensions, goal placement and flood fill.
    #[arg(long)]
    pub check_mazes: bool,
    /// Accepted for uniformity; evaluation is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Serialize)]
pub struct StatsArgs {
    /// One directory per treatment, holding run_log.csv files directly or
    /// one level down.
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    /// Generation spacing of the compared checkpoints.
    #[arg(long, default_value_t = 100)]
    pub checkpoint_every: u32,
    /// Log column to compare: train or test.
    #[arg(long, default_value = "test", value_parser = ["train", "test"])]
    pub metric: String,
    /// Median filter window applied to each run before comparison; 1 keeps raw values.
    #[arg(long, default_value_t = 1)]
    pub smooth: usize,
    #[arg(long, default_value_t = 5000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Seed of the bootstrap resampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Serialize)]
pub struct TrajectoryArgs {
    #[arg(long)]
    pub genome: PathBuf,
    #[arg(long)]
    pub mazes: PathBuf,
    /// Index of the maze inside the set.
    #[arg(long, default_value_t = 0)]
    pub maze_index: usize,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Accepted for uniformity; trials are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Prints the effective settings of a command to standard error.
pub fn print_effective<T: Serialize>(name: &str, value: &T) -> Outcome {
    let text = toml::to_string(value).runtime()?;
    eprintln!("# effective {name} configuration\n{text}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenerateMazes(a) => commands::generate_mazes(&a),
        Command::Evolve(a) => commands::evolve(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Stats(a) => stats::run(&a),
        Command::ExportTrajectory(a) => commands::export_trajectory(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
