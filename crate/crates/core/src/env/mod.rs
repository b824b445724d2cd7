//! Deterministic point-mass manipulation simulator with moving box obstacles.

mod geometry;
mod scenario;
mod sim;

pub use geometry::{Axis, BoxObstacle, Vec3};
pub use scenario::{ObstacleTemplate, Physics, ScenarioConfig, ScenarioFile, ScenarioGeometry, ScenarioName};
pub use sim::{
    action_to_force, in_collision, integrate, is_success, observe, observe_state, predict_obstacles, reset, reward,
    sample_goal, state_to_goal, step, step_force, with_goal, EnvState,
};
