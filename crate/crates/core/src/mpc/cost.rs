//! Horizon cost with the slack eliminated in closed form, and its gradient
//! by reverse accumulation through the rollout.

use serde::{Deserialize, Serialize};

use super::model::PmState;
use super::problem::{MpcParams, MpcProblem};
use super::smooth::clearance_smooth;
use crate::env::Vec3;

/// Cost split by term, for diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub goal: f64,
    pub force: f64,
    pub slack: f64,
    pub terminal_velocity: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.goal + self.force + self.slack + self.terminal_velocity
    }
}

/// Roll controls through the model; returns the `N + 1` states starting at `z_init`.
pub fn rollout(controls: &[Vec3], z_init: PmState, problem: &MpcProblem) -> Vec<PmState> {
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(z_init);
    let mut x = z_init;
    for &u in controls {
        x = problem.model.step(x, u);
        states.push(x);
    }
    states
}

/// Slack of one stage: `Σ_o max(0, h_min + margin − h_smooth)` terms and the
/// gradient of `Σ_o ξ²` with respect to position.
fn slack_terms(pos: Vec3, stage: usize, params: &MpcParams, problem: &MpcProblem) -> (f64, Vec3) {
    let c = &problem.config;
    let target = c.h_min + c.constraint_margin;
    let mut sum_sq = 0.0;
    let mut grad = Vec3::ZERO;
    for ob in &params.obstacles[stage] {
        let (h, dh) = clearance_smooth(pos, ob, params.robot_half, c.alpha);
        let xi = target - h;
        if xi > 0.0 {
            sum_sq += xi * xi;
            grad += dh * (-2.0 * xi);
        }
    }
    (sum_sq, grad)
}

fn weighted_sq(v: Vec3, w: [f64; 3]) -> f64 {
    w[0] * v.x * v.x + w[1] * v.y * v.y + w[2] * v.z * v.z
}

/// Cost of a control sequence with its per-term breakdown.
pub fn evaluate(controls: &[Vec3], z_init: PmState, params: &MpcParams, problem: &MpcProblem) -> CostBreakdown {
    let c = &problem.config;
    let states = rollout(controls, z_init, problem);
    let n = controls.len();
    let mut out = CostBreakdown::default();
    for k in 1..=n {
        let x = states[k];
        out.goal += c.w_goal * (x.pos - params.goal).norm_squared();
        out.force += weighted_sq(controls[k - 1], c.w_force);
        out.slack += c.w_slack * slack_terms(x.pos, k - 1, params, problem).0;
        if k == n {
            out.terminal_velocity += weighted_sq(x.vel, c.w_terminal_velocity);
        }
    }
    out
}

/// Total cost and its gradient with respect to every stage control.
pub fn total_cost(controls: &[Vec3], z_init: PmState, params: &MpcParams, problem: &MpcProblem) -> (f64, Vec<Vec3>) {
    let c = &problem.config;
    let model = &problem.model;
    let n = controls.len();
    let states = rollout(controls, z_init, problem);

    let mut cost = 0.0;
    let mut grad = vec![Vec3::ZERO; n];
    let mut adj_pos = Vec3::ZERO;
    let mut adj_vel = Vec3::ZERO;
    let tv = c.w_terminal_velocity;
    for k in (1..=n).rev() {
        let x = states[k];
        let u = controls[k - 1];
        let offset = x.pos - params.goal;
        let (slack_sq, slack_grad) = slack_terms(x.pos, k - 1, params, problem);
        cost += c.w_goal * offset.norm_squared() + weighted_sq(u, c.w_force) + c.w_slack * slack_sq;

        let mut d_pos = offset * (2.0 * c.w_goal) + slack_grad * c.w_slack + adj_pos;
        let mut d_vel = adj_vel;
        if k == n {
            cost += weighted_sq(x.vel, tv);
            d_vel += Vec3::new(2.0 * tv[0] * x.vel.x, 2.0 * tv[1] * x.vel.y, 2.0 * tv[2] * x.vel.z);
        }
        // p_k = p_{k-1} + v_k·dt
        d_vel += d_pos * model.dt;
        // v_k = clamp(v_{k-1} + u·dt/m)
        let mask = model.unclamped(states[k - 1], u);
        let d_pre = Vec3::new(d_vel.x * mask.x, d_vel.y * mask.y, d_vel.z * mask.z);
        let wf = c.w_force;
        grad[k - 1] = d_pre * (model.dt / model.mass)
            + Vec3::new(2.0 * wf[0] * u.x, 2.0 * wf[1] * u.y, 2.0 * wf[2] * u.z);
        adj_pos = std::mem::take(&mut d_pos);
        adj_vel = d_pre;
    }
    (cost, grad)
}
