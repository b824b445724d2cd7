use serde::{Deserialize, Serialize};

use super::model::{PmState, PointMassModel};
use crate::env::{predict_obstacles, BoxObstacle, EnvState, ScenarioConfig, Vec3};
use crate::error::{Error, Result};

/// Tunable MPC settings as they appear in the `[mpc]` config table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcConfig {
    pub horizon: usize,
    /// Stage goal-distance weight (w1).
    pub w_goal: f64,
    /// Per-axis force weights (w2..w4).
    pub w_force: [f64; 3],
    /// Slack weight (w5).
    pub w_slack: f64,
    /// Terminal per-axis velocity weights (w6..w8).
    pub w_terminal_velocity: [f64; 3],
    /// Smooth-max sharpness.
    pub alpha: f64,
    /// Clearance lower bound; the inflated box surface sits at 0.5.
    pub h_min: f64,
    /// Extra clearance demanded by the slack penalty on top of `h_min`.
    pub constraint_margin: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon: 8,
            w_goal: 10.0,
            w_force: [0.001; 3],
            w_slack: 1000.0,
            w_terminal_velocity: [10.0; 3],
            alpha: 300.0,
            h_min: 0.5,
            constraint_margin: 0.02,
            feas_tol: 0.0,
            max_iters: 100,
        }
    }
}

/// A horizon definition bound to a concrete point-mass model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcProblem {
    pub config: MpcConfig,
    pub model: PointMassModel,
}

impl MpcProblem {
    pub fn new(config: MpcConfig, model: PointMassModel) -> Result<Self> {
        let c = &config;
        if c.horizon < 2 {
            return Err(Error::Config(format!("MPC horizon must be >= 2 (got {})", c.horizon)));
        }
        let weights = [c.w_goal, c.w_slack]
            .into_iter()
            .chain(c.w_force)
            .chain(c.w_terminal_velocity);
        if weights.clone().any(|w| !(w >= 0.0)) {
            return Err(Error::Config("MPC weights must be non-negative".into()));
        }
        if !(c.alpha > 0.0) {
            return Err(Error::Config("MPC alpha must be > 0".into()));
        }
        if c.h_min != 0.5 {
            return Err(Error::Config(format!("MPC h_min must be 0.5 (got {})", c.h_min)));
        }
        if !(c.feas_tol >= 0.0 && c.constraint_margin >= 0.0) {
            return Err(Error::Config("feas_tol and constraint_margin must be >= 0".into()));
        }
        if !(model.mass > 0.0 && model.dt > 0.0) {
            return Err(Error::Config("model mass and dt must be positive".into()));
        }
        Ok(Self { config, model })
    }

    pub fn for_scenario(config: MpcConfig, scenario: &ScenarioConfig) -> Result<Self> {
        Self::new(config, PointMassModel::from_scenario(scenario))
    }

    pub fn horizon(&self) -> usize {
        self.config.horizon
    }
}

/// Real-time data of one solve: goal, predicted obstacles per stage, robot size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcParams {
    /// Goal, identical at every stage.
    pub goal: Vec3,
    /// `obstacles[k]` are the boxes at stage `k + 1`.
    pub obstacles: Vec<Vec<BoxObstacle>>,
    pub robot_half: Vec3,
}

impl MpcParams {
    pub fn from_env(state: &EnvState, goal: Vec3, problem: &MpcProblem, scenario: &ScenarioConfig) -> Self {
        Self {
            goal,
            obstacles: predict_obstacles(state, problem.horizon(), problem.model.dt),
            robot_half: scenario.object_half_extents(),
        }
    }

    /// Parameters with no obstacles at any stage.
    pub fn free(goal: Vec3, horizon: usize, robot_half: Vec3) -> Self {
        Self {
            goal,
            obstacles: vec![Vec::new(); horizon],
            robot_half,
        }
    }

    pub fn check(&self, problem: &MpcProblem) -> Result<()> {
        if self.obstacles.len() != problem.horizon() {
            return Err(Error::Shape {
                context: "MPC params stage count",
                expected: problem.horizon(),
                actual: self.obstacles.len(),
            });
        }
        Ok(())
    }
}

pub fn initial_state(state: &EnvState) -> PmState {
    PmState {
        pos: state.object_pos,
        vel: state.object_vel,
    }
}
