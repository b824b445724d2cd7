//! Training loop: HGG task generation, exploratory rollouts, HER storage and
//! DDPG updates, with a noise-free test pass after every iteration.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ddpg::{AgentConfig, DdpgAgent};
use super::her::{relabel_and_store, HerStrategy};
use super::hgg::{generate_intermediate_tasks, sample_targets, HggConfig, TrajectoryPool};
use super::replay::ReplayBuffer;
use super::trajectory::Trajectory;
use crate::env::{is_success, observe, reward, step, EnvState, ScenarioConfig, Vec3};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

/// One line of the learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub iteration: usize,
    pub success_rate: f64,
    pub mean_reward: f64,
    pub collisions_per_episode: f64,
}

pub fn curve_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("iteration,success_rate,mean_reward,collisions_per_episode\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.iteration, r.success_rate, r.mean_reward, r.collisions_per_episode
        );
    }
    out
}

pub fn write_curve(path: &Path, rows: &[CurveRow]) -> Result<()> {
    std::fs::write(path, curve_to_csv(rows)).map_err(|e| Error::io(path, e))
}

/// Rolls out the agent's own policy for a full episode of `episode_len` steps.
pub fn run_episode(
    agent: &DdpgAgent,
    scenario: &ScenarioConfig,
    initial: EnvState,
    goal: Vec3,
    explore: bool,
    rng: &mut Rng,
) -> Result<Trajectory> {
    let mut traj = Trajectory::new(initial, goal);
    for _ in 0..scenario.physics.episode_len {
        let s = traj.states.last().expect("trajectory holds s_0");
        let a = agent.select_action(&observe(s, goal), explore, rng)?;
        let (next, collided) = step(s, a, scenario);
        let r = reward(next.object_pos, goal, collided, scenario);
        traj.record(a, r, collided, next);
    }
    Ok(traj)
}

/// Noise-free episode that stops on first success.
fn test_episode(agent: &DdpgAgent, scenario: &ScenarioConfig, seed: u64) -> Result<(bool, f64, usize)> {
    let (mut s, goal) = crate::env::reset(scenario, seed)?;
    let mut rng = seed::rng(seed);
    let mut total = 0.0;
    let mut flags = Vec::new();
    for _ in 0..scenario.physics.episode_len {
        let a = agent.select_action(&observe(&s, goal), false, &mut rng)?;
        let (next, collided) = step(&s, a, scenario);
        total += reward(next.object_pos, goal, collided, scenario);
        flags.push(collided);
        s = next;
        if is_success(s.object_pos, goal, scenario) {
            return Ok((true, total, super::trajectory::count_collision_events(&flags)));
        }
    }
    Ok((false, total, super::trajectory::count_collision_events(&flags)))
}

/// Mutable training state; one call to [`Trainer::iterate`] is one HGG iteration.
pub struct Trainer {
    pub scenario: ScenarioConfig,
    pub hgg: HggConfig,
    pub agent_config: AgentConfig,
    pub agent: DdpgAgent,
    pub buffer: ReplayBuffer,
    pub pool: TrajectoryPool,
    her: HerStrategy,
    seed: u64,
    iteration: usize,
}

impl Trainer {
    pub fn new(scenario: ScenarioConfig, hgg: HggConfig, agent_config: AgentConfig, seed: u64) -> Result<Self> {
        hgg.validate()?;
        agent_config.validate()?;
        let her = agent_config.her_strategy.parse()?;
        let agent = DdpgAgent::new(scenario.observation_len(), &agent_config, seed)?;
        Ok(Self {
            buffer: ReplayBuffer::new(agent_config.buffer_capacity),
            pool: TrajectoryPool::new(hgg.pool_size),
            scenario,
            hgg,
            agent_config,
            agent,
            her,
            seed,
            iteration: 0,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Explore, learn, then test; returns the test statistics.
    pub fn iterate(&mut self) -> Result<CurveRow> {
        let i = self.iteration as u64;
        let k = self.hgg.tasks_per_iteration;
        let task_seed = seed::derive(self.seed, seed::stream::TARGETS, i);
        let tasks: Vec<(EnvState, Vec3)> =
            if self.iteration < self.hgg.bootstrap_iterations || self.pool.len() < k {
                sample_targets(&self.scenario, k, task_seed)?
                    .into_iter()
                    .map(|t| (t.initial, t.goal))
                    .collect()
            } else {
                let pool = self.pool.as_vec();
                generate_intermediate_tasks(&self.hgg, &pool, &self.agent, &self.scenario, task_seed)?
                    .into_iter()
                    .map(|t| (t.initial, t.goal))
                    .collect()
            };

        let mut her_rng = seed::rng(seed::derive(self.seed, seed::stream::HER, i));
        for (j, (initial, goal)) in tasks.into_iter().enumerate() {
            let mut rng = seed::rng(seed::derive(self.seed, seed::stream::NOISE, i * k as u64 + j as u64));
            let traj = run_episode(&self.agent, &self.scenario, initial, goal, true, &mut rng)?;
            let pushed = relabel_and_store(&mut self.buffer, &traj, self.her, &self.scenario, &mut her_rng);
            self.agent
                .observe_inputs(self.buffer.newest(pushed).map(|t| t.obs_goal.as_slice()));
            self.pool.push(traj);
        }

        let mut batch_rng = seed::rng(seed::derive(self.seed, seed::stream::MINIBATCH, i));
        for _ in 0..self.agent_config.updates_per_iteration {
            self.agent.update(&self.buffer, self.agent_config.batch_size, &mut batch_rng)?;
        }
        if !(self.agent.actor.is_finite() && self.agent.critic.is_finite()) {
            return Err(Error::SolverDiverged(format!(
                "network weights became non-finite at iteration {}",
                self.iteration
            )));
        }

        let n = self.hgg.test_episodes;
        let (mut succ, mut rew, mut coll) = (0usize, 0.0, 0usize);
        for e in 0..n {
            let (ok, r, c) = test_episode(
                &self.agent,
                &self.scenario,
                seed::derive(self.seed, seed::stream::TEST, i * n as u64 + e as u64),
            )?;
            succ += ok as usize;
            rew += r;
            coll += c;
        }
        let denom = n.max(1) as f64;
        let row = CurveRow {
            iteration: self.iteration,
            success_rate: succ as f64 / denom,
            mean_reward: rew / denom,
            collisions_per_episode: coll as f64 / denom,
        };
        self.iteration += 1;
        Ok(row)
    }
}

/// Trains for `iterations` HGG iterations; returns the agent and its learning curve.
pub fn train(
    scenario: &ScenarioConfig,
    hgg: &HggConfig,
    agent_config: &AgentConfig,
    iterations: usize,
    seed: u64,
) -> Result<(DdpgAgent, Vec<CurveRow>)> {
    let mut trainer = Trainer::new(scenario.clone(), hgg.clone(), agent_config.clone(), seed)?;
    let mut curve = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let row = trainer.iterate()?;
        log::debug!(
            "iteration {} success {:.2} reward {:.2}",
            row.iteration,
            row.success_rate,
            row.mean_reward
        );
        curve.push(row);
    }
    Ok((trainer.agent, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::env::ScenarioName;

    fn tiny() -> (ScenarioConfig, HggConfig, AgentConfig) {
        let cfg = Config::builtin();
        let scenario = cfg.scenario(ScenarioName::DynamicRectObstacles).unwrap();
        let hgg = HggConfig {
            tasks_per_iteration: 2,
            pool_size: 4,
            bootstrap_iterations: 1,
            test_episodes: 2,
            ..HggConfig::default()
        };
        let agent = AgentConfig {
            hidden: vec![8],
            batch_size: 16,
            updates_per_iteration: 2,
            ..AgentConfig::default()
        };
        (scenario, hgg, agent)
    }

    #[test]
    fn training_is_reproducible() {
        let (s, h, a) = tiny();
        let (agent1, c1) = train(&s, &h, &a, 3, 7).unwrap();
        let (agent2, c2) = train(&s, &h, &a, 3, 7).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(agent1.actor.flatten(), agent2.actor.flatten());
    }

    #[test]
    fn curve_csv_has_header_and_rows() {
        let rows = [CurveRow {
            iteration: 0,
            success_rate: 0.5,
            mean_reward: -3.0,
            collisions_per_episode: 0.0,
        }];
        let csv = curve_to_csv(&rows);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("iteration,"));
    }

    #[test]
    fn episode_has_full_length() {
        let (s, _, a) = tiny();
        let agent = DdpgAgent::new(s.observation_len(), &a, 1).unwrap();
        let (init, goal) = crate::env::reset(&s, 3).unwrap();
        let mut rng = seed::rng(0);
        let t = run_episode(&agent, &s, init, goal, true, &mut rng).unwrap();
        assert_eq!(t.steps(), s.physics.episode_len);
        assert_eq!(t.states.len(), t.steps() + 1);
    }
}
