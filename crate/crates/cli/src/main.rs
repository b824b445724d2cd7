use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use safe_manip::env::ScenarioName;
use safe_manip::harness::{self, ControllerKind, RunConfig};
use safe_manip::planner::{write_curve, AgentCheckpoint, Trainer};
use safe_manip::{Config, Error};

#[derive(Parser)]
#[command(name = "safe-manip", version, about = "Train and evaluate safe point-mass manipulation controllers")]
struct Cli {
    /// TOML file merged over the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "DynamicRectObstacles")]
    scenario: ScenarioName,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy; writes checkpoint.json and curve.csv.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        /// Overrides hgg.tasks_per_iteration.
        #[arg(long)]
        tasks: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate a controller over seeded episodes.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mpc-hgg")]
        controller: ControllerKind,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        /// Directory for report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one logged episode; writes a JSONL trajectory.
    Demo {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mpc-hgg")]
        controller: ControllerKind,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "demo.jsonl")]
        out: PathBuf,
    },
    /// Render a JSONL trajectory to SVG.
    Render {
        input: PathBuf,
        #[arg(long, default_value = "DynamicRectObstacles")]
        scenario: ScenarioName,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Manifest(_)) => 2,
        Some(Error::SolverDiverged(_)) => 3,
        Some(Error::Io { .. } | Error::Parse { .. } | Error::Json(_)) => 4,
        _ => 1,
    }
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = Config::load_or_builtin(cli.config.as_deref())?;
    match cli.command {
        Command::Train {
            common,
            iterations,
            tasks,
            out,
        } => {
            if let Some(k) = tasks {
                config.hgg.tasks_per_iteration = k;
            }
            let scenario = config.scenario(common.scenario)?;
            let mut trainer = Trainer::new(scenario, config.hgg.clone(), config.agent.clone(), common.seed)?;
            let start = Instant::now();
            let mut curve = Vec::with_capacity(iterations);
            for _ in 0..iterations {
                let row = trainer.iterate()?;
                log::info!(
                    "iter {:>4}  success {:.2}  reward {:>7.2}  collisions {:.2}",
                    row.iteration,
                    row.success_rate,
                    row.mean_reward,
                    row.collisions_per_episode
                );
                curve.push(row);
            }
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            AgentCheckpoint::capture(&trainer.agent, common.scenario.as_str()).save(&out.join("checkpoint.json"))?;
            write_curve(&out.join("curve.csv"), &curve)?;
            println!(
                "trained {iterations} iterations in {:.1}s; wrote {}",
                start.elapsed().as_secs_f64(),
                out.display()
            );
        }
        Command::Eval {
            common,
            controller,
            checkpoint,
            episodes,
            out,
        } => {
            let run = RunConfig {
                scenario: common.scenario,
                controller,
                checkpoint,
                seed: common.seed,
                episodes,
                out_dir: out,
            };
            let report = harness::evaluate(&config, &run)?;
            print!("{}", report.table());
        }
        Command::Demo {
            common,
            controller,
            checkpoint,
            out,
        } => {
            let run = RunConfig {
                scenario: common.scenario,
                controller,
                checkpoint,
                seed: common.seed,
                episodes: 1,
                out_dir: None,
            };
            let (outcome, log) = harness::demo(&config, &run)?;
            write(&out, &harness::to_jsonl(&log)?)?;
            println!(
                "reached {}  collisions {}  ticks {}; wrote {}",
                outcome.reached,
                outcome.collisions,
                outcome.length,
                out.display()
            );
        }
        Command::Render { input, scenario, out } => {
            let records = harness::read_jsonl(&input)?;
            let geo = config.scenario(scenario)?.geometry;
            let svg = harness::render_svg(&records, geo.workspace_min, geo.workspace_max);
            let out = out.unwrap_or_else(|| input.with_extension("svg"));
            write(&out, &svg).with_context(|| format!("rendering {}", input.display()))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
