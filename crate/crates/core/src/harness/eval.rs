//! Parallel evaluation and the run/demo entry points used by the CLI.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, ControllerKind, EpisodeOutcome, EpisodeSetup};
use super::report::EvalReport;
use super::trajlog::TickRecord;
use crate::config::Config;
use crate::env::ScenarioName;
use crate::error::{Error, Result};
use crate::mpc::MpcProblem;
use crate::planner::{AgentCheckpoint, DdpgAgent};
use crate::seed;

pub const THREADS_ENV: &str = "SAFE_MANIP_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: ScenarioName,
    pub controller: ControllerKind,
    pub checkpoint: Option<PathBuf>,
    pub seed: u64,
    pub episodes: usize,
    pub out_dir: Option<PathBuf>,
}

/// Seed of evaluation episode `index`.
pub fn episode_seed(master: u64, index: usize) -> u64 {
    seed::derive(master, seed::stream::EVAL, index as u64)
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Loads the checkpoint a run needs; `None` for the plain MPC controller.
pub fn load_agent(run: &RunConfig, config: &Config) -> Result<Option<DdpgAgent>> {
    if !run.controller.needs_agent() {
        return Ok(None);
    }
    let path = run
        .checkpoint
        .as_deref()
        .ok_or_else(|| Error::Config(format!("controller {} needs --checkpoint", run.controller)))?;
    let scenario = config.scenario(run.scenario)?;
    AgentCheckpoint::load_for(path, run.scenario.as_str(), scenario.observation_len()).map(Some)
}

/// Runs `episodes` seeded episodes in a worker pool and aggregates them.
pub fn evaluate_with(
    config: &Config,
    scenario: ScenarioName,
    controller: ControllerKind,
    agent: Option<&DdpgAgent>,
    episodes: usize,
    master_seed: u64,
) -> Result<(EvalReport, Vec<EpisodeOutcome>)> {
    let sc = config.scenario(scenario)?;
    let problem = MpcProblem::for_scenario(config.mpc.clone(), &sc)?;
    let setup = EpisodeSetup {
        scenario: &sc,
        controller,
        agent,
        problem: &problem,
        controller_config: &config.controller,
    };
    let run = || {
        (0..episodes)
            .into_par_iter()
            .map(|i| run_episode(setup, episode_seed(master_seed, i), None))
            .collect::<Result<Vec<_>>>()
    };
    let outcomes = match thread_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let report = EvalReport::from_outcomes(scenario.as_str(), controller, master_seed, &outcomes);
    Ok((report, outcomes))
}

pub fn evaluate(config: &Config, run: &RunConfig) -> Result<EvalReport> {
    let agent = load_agent(run, config)?;
    let (report, _) = evaluate_with(config, run.scenario, run.controller, agent.as_ref(), run.episodes, run.seed)?;
    if let Some(dir) = &run.out_dir {
        write_report(dir, &report)?;
    }
    Ok(report)
}

pub fn write_report(dir: &Path, report: &EvalReport) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json()?).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// One logged episode for `demo`.
pub fn demo(config: &Config, run: &RunConfig) -> Result<(EpisodeOutcome, Vec<TickRecord>)> {
    let agent = load_agent(run, config)?;
    let sc = config.scenario(run.scenario)?;
    let problem = MpcProblem::for_scenario(config.mpc.clone(), &sc)?;
    let setup = EpisodeSetup {
        scenario: &sc,
        controller: run.controller,
        agent: agent.as_ref(),
        problem: &problem,
        controller_config: &config.controller,
    };
    let mut log = Vec::new();
    let outcome = run_episode(setup, episode_seed(run.seed, 0), Some(&mut log))?;
    Ok((outcome, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mpc_eval_is_deterministic_and_monotone() {
        let cfg = Config::builtin();
        let (a, _) = evaluate_with(&cfg, ScenarioName::DynamicRectObstacles, ControllerKind::Mpc, None, 3, 11).unwrap();
        let (b, _) = evaluate_with(&cfg, ScenarioName::DynamicRectObstacles, ControllerKind::Mpc, None, 3, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.is_monotone());
        assert_eq!(a.episodes, 3);
    }

    #[test]
    fn zero_episodes() {
        let cfg = Config::builtin();
        let (r, _) = evaluate_with(&cfg, ScenarioName::DynamicRectObstacles, ControllerKind::Mpc, None, 0, 0).unwrap();
        assert!(r.success.iter().all(|t| t.rate.is_none()));
    }

    #[test]
    fn policy_controllers_need_checkpoint() {
        let run = RunConfig {
            scenario: ScenarioName::DynamicRectObstacles,
            controller: ControllerKind::MpcHgg,
            checkpoint: None,
            seed: 0,
            episodes: 1,
            out_dir: None,
        };
        assert!(matches!(evaluate(&Config::builtin(), &run), Err(Error::Config(_))));
    }
}
