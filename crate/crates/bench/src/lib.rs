//! Shared fixtures for the criterion benches.

use safe_manip::env::{reset, EnvState, ScenarioConfig, ScenarioName, Vec3};
use safe_manip::mpc::{MpcParams, MpcProblem};
use safe_manip::planner::{relabel_and_store, AgentConfig, DdpgAgent, HerStrategy, ReplayBuffer};
use safe_manip::Config;

pub struct SolveFixture {
    pub scenario: ScenarioConfig,
    pub problem: MpcProblem,
    pub states: Vec<(EnvState, Vec3)>,
}

impl SolveFixture {
    /// `count` reset states of `name`, each paired with its sampled goal.
    pub fn new(name: ScenarioName, count: usize) -> Self {
        let cfg = Config::builtin();
        let scenario = cfg.scenario(name).expect("builtin scenario");
        let problem = MpcProblem::for_scenario(cfg.mpc.clone(), &scenario).expect("builtin mpc config");
        let states = (0..count as u64).map(|s| reset(&scenario, s).expect("reset")).collect();
        Self {
            scenario,
            problem,
            states,
        }
    }

    pub fn params(&self, i: usize) -> MpcParams {
        let (s, g) = &self.states[i % self.states.len()];
        MpcParams::from_env(s, *g, &self.problem, &self.scenario)
    }
}

/// A randomly initialised agent and a buffer filled with relabeled episodes.
pub fn learning_fixture(hidden: usize, episodes: usize) -> (DdpgAgent, ReplayBuffer, AgentConfig) {
    let cfg = Config::builtin();
    let scenario = cfg.scenario(ScenarioName::DynamicRectObstacles).expect("builtin scenario");
    let agent_cfg = AgentConfig {
        hidden: vec![hidden, hidden],
        ..cfg.agent.clone()
    };
    let agent = DdpgAgent::new(scenario.observation_len(), &agent_cfg, 0).expect("agent");
    let mut buffer = ReplayBuffer::new(agent_cfg.buffer_capacity);
    let mut rng = safe_manip::seed::rng(1);
    for e in 0..episodes as u64 {
        let (s0, goal) = reset(&scenario, e).expect("reset");
        let traj = safe_manip::planner::run_episode(&agent, &scenario, s0, goal, true, &mut rng).expect("rollout");
        relabel_and_store(&mut buffer, &traj, HerStrategy::Future(4), &scenario, &mut rng);
    }
    (agent, buffer, agent_cfg)
}
