//! Closed-loop composition of the RL planner and the MPC actor, with the
//! fallback ladder used when a solve comes back infeasible.

use serde::{Deserialize, Serialize};

use crate::env::{observe, EnvState, ScenarioConfig, Vec3};
use crate::error::{Error, Result};
use crate::mpc::{initial_state, solve, MpcParams, MpcProblem, MpcSolution, PmState, PointMassModel, SolveStatus, SolverDiagnostics};
use crate::planner::DdpgAgent;

/// Controller settings. Only `action_scale` comes from the config file; the
/// rest is bound from the MPC problem and scenario by [`ControllerConfig::bind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Meters of goal offset per unit RL action.
    pub action_scale: f64,
    #[serde(skip)]
    pub horizon: usize,
    #[serde(skip)]
    pub v_max: f64,
    #[serde(skip)]
    pub dt: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            action_scale: 0.1,
            horizon: 8,
            v_max: 0.5,
            dt: 0.05,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.action_scale > 0.0) {
            return Err(Error::Config("controller.action_scale must be > 0".into()));
        }
        Ok(())
    }

    pub fn bind(&self, problem: &MpcProblem) -> Self {
        Self {
            action_scale: self.action_scale,
            horizon: problem.horizon(),
            v_max: problem.model.v_max,
            dt: problem.model.dt,
        }
    }

    /// Distance the object can cover over one horizon.
    pub fn reach(&self) -> f64 {
        self.horizon as f64 * self.v_max * self.dt
    }
}

/// Per-episode controller memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    /// Last feasible solution `U_{t-1}`.
    pub prev_solution: Option<MpcSolution>,
    /// 1-based index into `prev_solution` of the control last applied.
    pub fallback_index: usize,
}

impl Default for ControllerState {
    fn default() -> Self {
        Self {
            prev_solution: None,
            fallback_index: 1,
        }
    }
}

/// Which rung of the ladder produced the applied force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSource {
    Solution,
    Fallback,
    Decelerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub intermediate_goal: Vec3,
    pub rl_action: Option<Vec3>,
    pub status: SolveStatus,
    pub source: ActionSource,
    pub fallback_index: usize,
    pub max_violation: f64,
    pub force: Vec3,
    /// Predicted positions of this step's solve, stages `1..=N`.
    pub predicted: Vec<Vec3>,
    pub solver: SolverDiagnostics,
}

/// `g` when within one horizon of reach, else `p + action_scale·a` inside the workspace.
pub fn intermediate_goal(p: Vec3, a: Vec3, goal: Vec3, cfg: &ControllerConfig, scenario: &ScenarioConfig) -> Vec3 {
    if p.distance(goal) <= cfg.reach() {
        return goal;
    }
    let mut g = scenario.clamp_to_workspace(p + a * cfg.action_scale);
    if scenario.planar() {
        g.z = p.z;
    }
    g
}

/// Env action whose dead-beat force reproduces `force` from the current state:
/// the displacement to the model's next predicted position over `δ_max`.
pub fn force_to_action(z: PmState, force: Vec3, model: &PointMassModel, scenario: &ScenarioConfig) -> Vec3 {
    let next = model.step(z, model.project(force));
    ((next.pos - z.pos) * (1.0 / scenario.max_displacement())).clamp_abs(1.0)
}

/// Maximal braking towards zero velocity.
pub fn no_action(vel: Vec3, model: &PointMassModel, scenario: &ScenarioConfig) -> Vec3 {
    let z = PmState { pos: Vec3::ZERO, vel };
    force_to_action(z, model.braking_force(vel), model, scenario)
}

fn warm_start(ctrl: &ControllerState) -> Option<Vec<Vec3>> {
    let prev = ctrl.prev_solution.as_ref()?;
    let skip = ctrl.fallback_index.min(prev.controls.len());
    let mut u: Vec<Vec3> = prev.controls[skip..].to_vec();
    let last = *prev.controls.last()?;
    u.resize(prev.controls.len(), last);
    Some(u)
}

/// One control step. `agent = None` steers straight at `goal` (the plain MPC baseline).
pub fn act(
    state: &EnvState,
    goal: Vec3,
    agent: Option<&DdpgAgent>,
    problem: &MpcProblem,
    ctrl: &mut ControllerState,
    scenario: &ScenarioConfig,
    cfg: &ControllerConfig,
) -> Result<(Vec3, StepDiagnostics)> {
    let cfg = cfg.bind(problem);
    let p = state.object_pos;
    let rl_action = match agent {
        Some(agent) => Some(agent.policy(&observe(state, goal))?.clamp_abs(1.0)),
        None => None,
    };
    let g_t = match rl_action {
        Some(a) => intermediate_goal(p, a, goal, &cfg, scenario),
        None => goal,
    };

    let params = MpcParams::from_env(state, g_t, problem, scenario);
    let z = initial_state(state);
    let warm = warm_start(ctrl);
    let solution = solve(z, &params, problem, warm.as_deref())?;

    let n = problem.horizon();
    let (force, source) = if solution.is_feasible() {
        ctrl.fallback_index = 1;
        let f = solution.controls[0];
        ctrl.prev_solution = Some(solution.clone());
        (f, ActionSource::Solution)
    } else if let (Some(prev), true) = (ctrl.prev_solution.as_ref(), ctrl.fallback_index < n) {
        ctrl.fallback_index += 1;
        (prev.controls[ctrl.fallback_index - 1], ActionSource::Fallback)
    } else {
        (problem.model.braking_force(z.vel), ActionSource::Decelerate)
    };
    let action = force_to_action(z, force, &problem.model, scenario);

    Ok((
        action,
        StepDiagnostics {
            intermediate_goal: g_t,
            rl_action,
            status: solution.status,
            source,
            fallback_index: ctrl.fallback_index,
            max_violation: solution.max_violation,
            force,
            predicted: solution.predicted_positions(),
            solver: solution.diagnostics,
        },
    ))
}
