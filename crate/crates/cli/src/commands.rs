use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cmoea_core::harness::{
    run_experiment_with, Checkpoint, RunConfig, RunOptions, CHECKPOINT_FILE,
};
use cmoea_core::maze::{performance, simulate, simulate_traced, MazeSet};
use cmoea_core::neuro::NetworkGenome;
use serde::Serialize;

use crate::{
    print_effective, usage_error, Classify, EvaluateArgs, EvolveArgs, GenerateArgs, Outcome,
    TrajectoryArgs,
};

pub const LOG_FILE: &str = "run_log.csv";
pub const CHAMPION_FILE: &str = "champion.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.toml";

fn write_output(path: &Path, text: &str) -> Outcome {
    fs::write(path, text)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
        .usage()
}

pub fn generate_mazes(args: &GenerateArgs) -> Outcome {
    print_effective("generate-mazes", args)?;
    if args.count == 0 {
        return usage_error("--count must be at least 1");
    }
    let set = MazeSet::generate(args.count, args.seed).runtime()?;
    write_output(&args.out, &set.to_json().runtime()?)?;
    println!("maze_index,goal_x,goal_y,division_walls,reachable_cells");
    for (i, grid) in set.grids.iter().enumerate() {
        println!(
            "{i},{},{},{},{}",
            grid.goal_cell.0,
            grid.goal_cell.1,
            grid.division_walls.len(),
            grid.reachable_cells()
        );
    }
    Ok(())
}

fn effective_config(args: &EvolveArgs) -> Outcome<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).usage()?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = args.$flag { cfg.$($field).+ = v; })*
        };
    }
    set!(
        seed => master_seed,
        treatment => treatment,
        generations => generations,
        offspring => offspring_per_generation,
        population_size => population_size,
        bin_size => bin_size,
        bin_cap => bin_cap,
        training_mazes => training_mazes.count,
        training_seed => training_mazes.seed,
        test_mazes => test_mazes.count,
        test_seed => test_mazes.seed,
        test_interval => test_interval,
        checkpoint_interval => checkpoint_interval,
        workers => worker_count,
    );
    cfg.ct_augmented |= args.ct_augmented;
    cfg.record_wall_time |= args.wall_time;
    cfg.resolved().usage()
}

#[derive(Serialize)]
struct Summary {
    treatment: String,
    master_seed: u64,
    generations: u32,
    population_size: usize,
    best_train_perf: f64,
    train_solved: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_perf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_solved: Option<usize>,
    champion_id: u64,
}

pub fn evolve(args: &EvolveArgs) -> Outcome {
    let cfg = effective_config(args)?;
    let text = cfg.to_toml();
    eprintln!("# effective evolve configuration\n{text}");
    fs::create_dir_all(&args.out)
        .map_err(|e| anyhow::anyhow!("cannot create {}: {e}", args.out.display()))
        .usage()?;
    write_output(&args.out.join(CONFIG_FILE), &text)?;
    let checkpoint = args.out.join(CHECKPOINT_FILE);
    let resume = if args.resume && checkpoint.exists() {
        let cp = Checkpoint::load(&checkpoint).usage()?;
        log::info!("resuming after generation {}", cp.generation);
        Some(cp)
    } else {
        None
    };
    let options = RunOptions {
        checkpoint_dir: Some(args.out.clone()),
        resume,
        fault_at_generation: args.fault_at_generation,
        ..RunOptions::default()
    };
    let out = match run_experiment_with(&cfg, options) {
        Err(e @ cmoea_core::Error::Config(_)) => return Err(e).usage(),
        other => other.runtime()?,
    };
    out.log.save(&args.out.join(LOG_FILE)).runtime()?;
    out.champion
        .genome
        .save(&args.out.join(CHAMPION_FILE))
        .runtime()?;
    let last_test = out.log.test_rows().last();
    let last = out.log.last().expect("a finished run has at least one row");
    let summary = Summary {
        treatment: toml::Value::try_from(cfg.treatment)
            .runtime()?
            .as_str()
            .unwrap_or_default()
            .to_owned(),
        master_seed: cfg.master_seed,
        generations: cfg.generations,
        population_size: out.population_size,
        best_train_perf: last.best_train_perf,
        train_solved: last.train_solved,
        test_perf: last_test.and_then(|r| r.test_perf),
        test_solved: last_test.and_then(|r| r.test_solved),
        champion_id: out.champion.id,
    };
    let text = toml::to_string(&summary).runtime()?;
    fs::write(args.out.join(SUMMARY_FILE), &text).runtime()?;
    print!("{text}");
    Ok(())
}

fn load_mazes(path: &Path) -> Outcome<MazeSet> {
    MazeSet::load(path).usage()
}

fn load_genome(path: &Path) -> Outcome<NetworkGenome> {
    let genome = NetworkGenome::load(path).usage()?;
    cmoea_core::neuro::Network::new(&genome).usage()?;
    Ok(genome)
}

pub fn evaluate(args: &EvaluateArgs) -> Outcome {
    print_effective("evaluate", args)?;
    let set = load_mazes(&args.mazes)?;
    let mut out = String::new();
    if args.check_mazes {
        let mut invalid = 0;
        writeln!(out, "maze_index,valid,reason").unwrap();
        for (i, grid) in set.grids.iter().enumerate() {
            match grid.validate() {
                Ok(()) => writeln!(out, "{i},true,").unwrap(),
                Err(e) => {
                    invalid += 1;
                    writeln!(out, "{i},false,\"{}\"", e.to_string().replace('"', "'")).unwrap();
                }
            }
        }
        print!("{out}");
        if invalid > 0 {
            return usage_error(format!("{invalid} of {} mazes are invalid", set.len()));
        }
        out.clear();
    }
    if let Some(path) = &args.genome {
        let genome = load_genome(path)?;
        let mut solved = 0;
        let mut total = 0.0;
        writeln!(out, "maze_index,performance,solved,final_x,final_y").unwrap();
        for (i, maze) in set.mazes().iter().enumerate() {
            let o = simulate(maze, &genome).runtime()?;
            let score = performance(maze, &o);
            solved += usize::from(o.solved);
            total += score;
            writeln!(
                out,
                "{i},{score},{},{},{}",
                u8::from(o.solved),
                o.final_position.x,
                o.final_position.y
            )
            .unwrap();
        }
        print!("{out}");
        eprintln!(
            "mean performance {:.6}, solved {solved}/{}",
            total / set.len() as f64,
            set.len()
        );
    }
    Ok(())
}

pub fn export_trajectory(args: &TrajectoryArgs) -> Outcome {
    print_effective("export-trajectory", args)?;
    let set = load_mazes(&args.mazes)?;
    let genome = load_genome(&args.genome)?;
    let Some(grid) = set.grids.get(args.maze_index) else {
        return usage_error(format!(
            "maze index {} out of range for {} mazes",
            args.maze_index,
            set.len()
        ));
    };
    let maze = grid.to_maze();
    let mut out = String::from("step,x,y,heading\n");
    let outcome = simulate_traced(&maze, &genome, |t, pose| {
        writeln!(
            out,
            "{t},{},{},{}",
            pose.position.x, pose.position.y, pose.heading
        )
        .unwrap();
    })
    .runtime()?;
    match &args.out {
        Some(path) => write_output(path, &out)?,
        None => print!("{out}"),
    }
    eprintln!(
        "solved {} after {} steps",
        outcome.solved, outcome.steps_used
    );
    Ok(())
}
