//! Point-mass simulator: reset, stepping, reward and observations.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::geometry::{BoxObstacle, Vec3};
use super::scenario::ScenarioConfig;
use crate::error::{Error, Result};
use crate::seed;

const MAX_GOAL_DRAWS: usize = 1000;

/// Simulator state at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub object_pos: Vec3,
    pub object_vel: Vec3,
    pub obstacles: Vec<BoxObstacle>,
    pub tick: u64,
}

/// Sample an initial state and a goal from the scenario's task distribution.
pub fn reset(scenario: &ScenarioConfig, seed: u64) -> Result<(EnvState, Vec3)> {
    let mut rng = seed::rng(seed);
    let geo = &scenario.geometry;

    let obstacles = geo
        .obstacles
        .iter()
        .map(|t| {
            let axis = t.motion_axis.index();
            let mut center = t.center;
            center[axis] = if t.track[0] < t.track[1] {
                rng.random_range(t.track[0]..=t.track[1])
            } else {
                t.track[0]
            };
            let mut velocity = Vec3::ZERO;
            if t.is_dynamic() {
                let speed = if t.speed[0] < t.speed[1] {
                    rng.random_range(t.speed[0]..=t.speed[1])
                } else {
                    t.speed[0]
                };
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                velocity[axis] = sign * speed;
            }
            BoxObstacle {
                center,
                half_extents: t.half_extents,
                velocity,
                track_min: t.track[0],
                track_max: t.track[1],
                motion_axis: t.motion_axis,
            }
        })
        .collect::<Vec<_>>();

    let state = EnvState {
        object_pos: geo.start,
        object_vel: Vec3::ZERO,
        obstacles,
        tick: 0,
    };
    let half = scenario.object_half_extents();
    for _ in 0..MAX_GOAL_DRAWS {
        let goal = sample_goal(scenario, &mut rng);
        if !state.obstacles.iter().any(|o| o.overlaps(goal, half)) {
            return Ok((state, goal));
        }
    }
    Err(Error::Config(format!(
        "{}: no collision-free goal after {MAX_GOAL_DRAWS} draws",
        scenario.name
    )))
}

/// Uniform draw from the scenario's 2D goal rectangle.
pub fn sample_goal(scenario: &ScenarioConfig, rng: &mut seed::Rng) -> Vec3 {
    let g = &scenario.geometry;
    let draw = |rng: &mut seed::Rng, lo: f64, hi: f64| {
        if lo < hi {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    };
    let x = draw(rng, g.goal_min[0], g.goal_max[0]);
    let y = draw(rng, g.goal_min[1], g.goal_max[1]);
    Vec3::new(x, y, g.goal_z)
}

/// Force the internal dead-beat law produces for a normalized displacement action.
pub fn action_to_force(state: &EnvState, action: Vec3, scenario: &ScenarioConfig) -> Vec3 {
    let p = &scenario.physics;
    let mut a = action.clamp_abs(1.0);
    if scenario.planar() {
        a.z = 0.0;
    }
    let delta = a * scenario.max_displacement();
    let force = (delta * (1.0 / p.dt) - state.object_vel) * (p.mass / p.dt);
    force.clamp_abs(p.f_max)
}

/// Semi-implicit Euler update of the object under a force.
///
/// Shared by the simulator and the MPC model so predictions match execution.
pub fn integrate(pos: Vec3, vel: Vec3, force: Vec3, mass: f64, dt: f64, v_max: f64) -> (Vec3, Vec3) {
    let v = (vel + force * (dt / mass)).clamp_abs(v_max);
    (pos + v * dt, v)
}

/// Advance the world one tick under an explicit force.
pub fn step_force(state: &EnvState, force: Vec3, scenario: &ScenarioConfig) -> (EnvState, bool) {
    let p = &scenario.physics;
    let mut force = force.clamp_abs(p.f_max);
    if scenario.planar() {
        force.z = 0.0;
    }
    let (raw_pos, mut vel) = integrate(state.object_pos, state.object_vel, force, p.mass, p.dt, p.v_max);
    let pos = scenario.clamp_to_workspace(raw_pos);
    for axis in 0..3 {
        if pos[axis] != raw_pos[axis] {
            vel[axis] = 0.0;
        }
    }
    let obstacles: Vec<BoxObstacle> = state.obstacles.iter().map(|o| o.advance(p.dt)).collect();
    let collided = in_collision(pos, scenario.object_half_extents(), &obstacles);
    (
        EnvState {
            object_pos: pos,
            object_vel: vel,
            obstacles,
            tick: state.tick + 1,
        },
        collided,
    )
}

/// Advance the world one tick under a normalized displacement action in `[-1, 1]^3`.
pub fn step(state: &EnvState, action: Vec3, scenario: &ScenarioConfig) -> (EnvState, bool) {
    let force = action_to_force(state, action, scenario);
    step_force(state, force, scenario)
}

pub fn in_collision(pos: Vec3, half: Vec3, obstacles: &[BoxObstacle]) -> bool {
    obstacles.iter().any(|o| o.overlaps(pos, half))
}

pub fn is_success(pos: Vec3, goal: Vec3, scenario: &ScenarioConfig) -> bool {
    pos.distance(goal) <= scenario.physics.success_radius
}

/// Ternary sparse reward: `eta` on collision, `0` at the goal, `-1` otherwise.
pub fn reward(achieved: Vec3, goal: Vec3, collided: bool, scenario: &ScenarioConfig) -> f64 {
    if collided {
        scenario.physics.eta
    } else if is_success(achieved, goal, scenario) {
        0.0
    } else {
        -1.0
    }
}

/// Goal-independent part of the observation.
pub fn observe_state(state: &EnvState) -> Vec<f64> {
    let mut out = Vec::with_capacity(6 + 9 * state.obstacles.len() + 3);
    out.extend(state.object_pos.to_array());
    out.extend(state.object_vel.to_array());
    for o in &state.obstacles {
        out.extend(o.center.to_array());
        out.extend(o.velocity.to_array());
        out.extend(o.half_extents.to_array());
    }
    out
}

/// Flat observation ‖ goal vector fed to the actor and critic.
pub fn observe(state: &EnvState, goal: Vec3) -> Vec<f64> {
    let mut out = observe_state(state);
    out.extend(goal.to_array());
    out
}

/// Replace the trailing goal of an observation vector.
pub fn with_goal(obs: &[f64], goal: Vec3) -> Vec<f64> {
    let mut out = obs[..obs.len() - 3].to_vec();
    out.extend(goal.to_array());
    out
}

/// Obstacle boxes at stages `1..=horizon`, advanced exactly as the simulator does.
pub fn predict_obstacles(state: &EnvState, horizon: usize, dt: f64) -> Vec<Vec<BoxObstacle>> {
    let mut stages = Vec::with_capacity(horizon);
    let mut current = state.obstacles.clone();
    for _ in 0..horizon {
        current = current.iter().map(|o| o.advance(dt)).collect();
        stages.push(current.clone());
    }
    stages
}

/// Goal-space projection of a state: the object position.
pub fn state_to_goal(state: &EnvState) -> Vec3 {
    state.object_pos
}
