//! Hindsight goal generation: pick intermediate goals from past trajectories
//! that trade closeness to the target tasks against the learned value.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::ddpg::DdpgAgent;
use super::hungarian;
use super::trajectory::Trajectory;
use crate::env::{reset, state_to_goal, EnvState, ScenarioConfig, Vec3};
use crate::error::{Error, Result};
use crate::seed;

/// `[hgg]` table of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HggConfig {
    /// Lipschitz weight `L`; the value enters scores as `V/L`.
    pub lipschitz: f64,
    /// Weight `c` on the distance between initial states.
    pub init_weight: f64,
    /// `K = M`: target tasks sampled, trajectories matched and episodes run per iteration.
    pub tasks_per_iteration: usize,
    /// Capacity of the recent-trajectory pool.
    pub pool_size: usize,
    /// Iterations that explore towards uniformly sampled goals before matching starts.
    pub bootstrap_iterations: usize,
    /// Noise-free episodes on the true task distribution after each iteration.
    pub test_episodes: usize,
}

impl Default for HggConfig {
    fn default() -> Self {
        Self {
            lipschitz: 5.0,
            init_weight: 3.0,
            tasks_per_iteration: 16,
            pool_size: 100,
            bootstrap_iterations: 10,
            test_episodes: 10,
        }
    }
}

impl HggConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lipschitz > 0.0) {
            return Err(Error::Config("hgg.lipschitz must be > 0".into()));
        }
        if !(self.init_weight > 0.0) {
            return Err(Error::Config("hgg.init_weight must be > 0".into()));
        }
        if self.tasks_per_iteration == 0 {
            return Err(Error::Config("hgg.tasks_per_iteration must be >= 1".into()));
        }
        if self.pool_size < self.tasks_per_iteration {
            return Err(Error::Config("hgg.pool_size must be >= tasks_per_iteration".into()));
        }
        Ok(())
    }
}

/// A sample `(ŝ0, ĝ)` from the true task distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTask {
    pub initial: EnvState,
    pub goal: Vec3,
}

/// Start state paired with an intermediate goal taken from a matched trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HindsightTask {
    pub initial: EnvState,
    pub goal: Vec3,
    pub target_index: usize,
    pub trajectory_index: usize,
}

/// Source of `V(s0‖g)` estimates.
pub trait ValueEstimate {
    fn start_values(&self, s0: &EnvState, goals: &[Vec3]) -> Result<Vec<f64>>;
}

impl ValueEstimate for DdpgAgent {
    fn start_values(&self, s0: &EnvState, goals: &[Vec3]) -> Result<Vec<f64>> {
        DdpgAgent::start_values(self, s0, goals)
    }
}

impl<F> ValueEstimate for F
where
    F: Fn(&EnvState, Vec3) -> f64,
{
    fn start_values(&self, s0: &EnvState, goals: &[Vec3]) -> Result<Vec<f64>> {
        Ok(goals.iter().map(|g| self(s0, *g)).collect())
    }
}

/// Most recent trajectories, oldest evicted first.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryPool {
    items: VecDeque<Trajectory>,
    capacity: usize,
}

impl TrajectoryPool {
    pub fn new(capacity: usize) -> Self {
        Self {
            items: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, t: Trajectory) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn as_vec(&self) -> Vec<&Trajectory> {
        self.items.iter().collect()
    }
}

/// `V(s_0‖m(s_t))` for every state of a trajectory.
pub fn trajectory_values(traj: &Trajectory, values: &dyn ValueEstimate) -> Result<Vec<f64>> {
    let goals: Vec<Vec3> = traj.achieved_goals().collect();
    values.start_values(traj.initial(), &goals)
}

/// Per-state scores `‖ĝ − m(s_t)‖ − V(s_0‖m(s_t))/L`.
pub fn candidate_scores(target_goal: Vec3, traj: &Trajectory, values: &[f64], cfg: &HggConfig) -> Vec<f64> {
    traj.achieved_goals()
        .zip(values)
        .map(|(g, v)| target_goal.distance(g) - v / cfg.lipschitz)
        .collect()
}

/// Index of the smallest score, earliest on ties.
fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    best
}

/// Matching weight from precomputed trajectory values.
pub fn weight_from_values(target: &TargetTask, traj: &Trajectory, values: &[f64], cfg: &HggConfig) -> f64 {
    let init_term = cfg.init_weight * state_to_goal(&target.initial).distance(state_to_goal(traj.initial()));
    let scores = candidate_scores(target.goal, traj, values, cfg);
    init_term + scores[argmin(&scores)]
}

/// `c‖m(ŝ0) − m(s0)‖ + min_t (‖ĝ − m(s_t)‖ − V(s0‖m(s_t))/L)`.
pub fn hgg_weight(target: &TargetTask, traj: &Trajectory, cfg: &HggConfig, values: &dyn ValueEstimate) -> Result<f64> {
    let v = trajectory_values(traj, values)?;
    Ok(weight_from_values(target, traj, &v, cfg))
}

/// Achieved goal of the state minimizing the candidate score.
pub fn select_hindsight_goal(
    traj: &Trajectory,
    target_goal: Vec3,
    cfg: &HggConfig,
    values: &dyn ValueEstimate,
) -> Result<Vec3> {
    let v = trajectory_values(traj, values)?;
    Ok(traj.achieved(argmin(&candidate_scores(target_goal, traj, &v, cfg))))
}

/// Rows of per-state values or weights.
pub type Rows = Vec<Vec<f64>>;

/// `K × |pool|` matrix of matching weights, plus the per-state values of
/// every pool trajectory.
pub fn weight_matrix(
    targets: &[TargetTask],
    pool: &[&Trajectory],
    cfg: &HggConfig,
    values: &dyn ValueEstimate,
) -> Result<(Rows, Rows)> {
    let traj_values = pool
        .iter()
        .map(|t| trajectory_values(t, values))
        .collect::<Result<Vec<_>>>()?;
    let matrix = targets
        .iter()
        .map(|target| {
            pool.iter()
                .zip(&traj_values)
                .map(|(t, v)| weight_from_values(target, t, v, cfg))
                .collect()
        })
        .collect();
    Ok((matrix, traj_values))
}

/// Distinct trajectory per target minimizing the summed weight.
pub fn match_trajectories(
    targets: &[TargetTask],
    pool: &[&Trajectory],
    cfg: &HggConfig,
    values: &dyn ValueEstimate,
) -> Result<Vec<usize>> {
    if pool.len() < targets.len() {
        return Err(Error::InsufficientData {
            needed: targets.len(),
            available: pool.len(),
        });
    }
    let (matrix, _) = weight_matrix(targets, pool, cfg, values)?;
    hungarian::assign(&matrix)
}

/// `K` samples from the scenario's task distribution.
pub fn sample_targets(scenario: &ScenarioConfig, count: usize, seed: u64) -> Result<Vec<TargetTask>> {
    (0..count)
        .map(|i| {
            let (initial, goal) = reset(scenario, seed::derive(seed, seed::stream::TARGETS, i as u64))?;
            Ok(TargetTask { initial, goal })
        })
        .collect()
}

/// Samples targets, matches them to pool trajectories and picks a hindsight
/// goal from each matched trajectory.
pub fn generate_intermediate_tasks(
    cfg: &HggConfig,
    pool: &[&Trajectory],
    values: &dyn ValueEstimate,
    scenario: &ScenarioConfig,
    seed: u64,
) -> Result<Vec<HindsightTask>> {
    let k = cfg.tasks_per_iteration;
    if pool.len() < k {
        return Err(Error::InsufficientData {
            needed: k,
            available: pool.len(),
        });
    }
    let targets = sample_targets(scenario, k, seed)?;
    let (matrix, traj_values) = weight_matrix(&targets, pool, cfg, values)?;
    let assignment = hungarian::assign(&matrix)?;
    Ok(targets
        .into_iter()
        .zip(assignment)
        .enumerate()
        .map(|(i, (target, j))| {
            let traj = pool[j];
            let scores = candidate_scores(target.goal, traj, &traj_values[j], cfg);
            HindsightTask {
                goal: traj.achieved(argmin(&scores)),
                initial: target.initial,
                target_index: i,
                trajectory_index: j,
            }
        })
        .collect())
}
