//! Single-shooting projected-gradient solver with backtracking line search.

use serde::{Deserialize, Serialize};

use super::cost::{rollout, total_cost};
use super::model::PmState;
use super::problem::{MpcParams, MpcProblem};
use super::smooth::clearance_exact;
use crate::env::Vec3;
use crate::error::{Error, Result};

const GRAD_TOL: f64 = 1e-6;
const DECREASE_TOL: f64 = 1e-10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Feasible,
    Infeasible,
}

/// Where the winning iterate started from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    WarmStart,
    Zero,
    Brake,
    Escape,
}

/// Per-solve diagnostics, serialized into the trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub grad_norm: f64,
    pub cost_trace: Vec<f64>,
    pub start: StartKind,
    pub starts_tried: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcSolution {
    /// Forces for stages `1..=N`.
    pub controls: Vec<Vec3>,
    /// `N + 1` predicted states; `states[0]` is the initial state.
    pub states: Vec<PmState>,
    pub status: SolveStatus,
    pub cost: f64,
    pub max_violation: f64,
    pub diagnostics: SolverDiagnostics,
}

impl MpcSolution {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }

    /// Previous plan advanced one stage, last control repeated.
    pub fn shifted_controls(&self) -> Vec<Vec3> {
        let mut u: Vec<Vec3> = self.controls.iter().skip(1).copied().collect();
        if let Some(&last) = self.controls.last() {
            u.push(last);
        }
        u
    }

    pub fn predicted_positions(&self) -> Vec<Vec3> {
        self.states.iter().skip(1).map(|s| s.pos).collect()
    }
}

/// Exact-geometry feasibility of a set of predicted states (stage `k` pairs
/// with `states[k]`, `k ≥ 1`). Returns the verdict and `max(0, h_min − min h)`.
pub fn check_states(states: &[PmState], params: &MpcParams, problem: &MpcProblem) -> (bool, f64) {
    let h_min = problem.config.h_min;
    let mut worst = f64::INFINITY;
    for (stage, obstacles) in params.obstacles.iter().enumerate() {
        let Some(x) = states.get(stage + 1) else { break };
        for ob in obstacles {
            worst = worst.min(clearance_exact(x.pos, ob, params.robot_half));
        }
    }
    let violation = (h_min - worst).max(0.0);
    (violation <= problem.config.feas_tol, violation)
}

/// Re-evaluates a solution's feasibility with the exact (non-smooth) clearance.
pub fn check_feasible(solution: &MpcSolution, params: &MpcParams, problem: &MpcProblem) -> (bool, f64) {
    check_states(&solution.states, params, problem)
}

fn project(u: &mut [Vec3], problem: &MpcProblem) {
    for f in u.iter_mut() {
        *f = problem.model.project(*f);
    }
}

fn dot(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(*y)).sum()
}

struct Descent {
    controls: Vec<Vec3>,
    cost: f64,
    grad_norm: f64,
    iterations: usize,
    trace: Vec<f64>,
}

/// Projected gradient descent from one starting point. Every accepted step
/// satisfies the Armijo condition, so the cost trace is non-increasing.
fn descend(start: Vec<Vec3>, z_init: PmState, params: &MpcParams, problem: &MpcProblem) -> Result<Descent> {
    let mut u = start;
    project(&mut u, problem);
    let (mut cost, mut grad) = total_cost(&u, z_init, params, problem);
    if !cost.is_finite() {
        return Err(Error::SolverDiverged(format!("non-finite initial cost {cost}")));
    }
    let mut trace = vec![cost];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;

    for _ in 0..problem.config.max_iters {
        // Projected-gradient stationarity measure.
        let mut probe: Vec<Vec3> = u.iter().zip(&grad).map(|(x, g)| *x - *g).collect();
        project(&mut probe, problem);
        grad_norm = probe
            .iter()
            .zip(&u)
            .map(|(p, x)| (*p - *x).norm_squared())
            .sum::<f64>()
            .sqrt();
        if grad_norm < GRAD_TOL {
            break;
        }

        let mut accepted = None;
        let mut t = step;
        for _ in 0..MAX_BACKTRACKS {
            let mut cand: Vec<Vec3> = u.iter().zip(&grad).map(|(x, g)| *x - *g * t).collect();
            project(&mut cand, problem);
            let delta: Vec<Vec3> = cand.iter().zip(&u).map(|(a, b)| *a - *b).collect();
            let (c_new, g_new) = total_cost(&cand, z_init, params, problem);
            if !c_new.is_finite() {
                return Err(Error::SolverDiverged(format!("non-finite cost {c_new}")));
            }
            if c_new <= cost + ARMIJO * dot(&grad, &delta) {
                accepted = Some((cand, delta, c_new, g_new, t));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, delta, c_new, g_new, t_used)) = accepted else {
            break;
        };
        iterations += 1;
        let decrease = cost - c_new;

        // Barzilai–Borwein guess for the next trial step.
        let dg: Vec<Vec3> = g_new.iter().zip(&grad).map(|(a, b)| *a - *b).collect();
        let sy = dot(&delta, &dg);
        let ss = dot(&delta, &delta);
        step = if sy > 0.0 { (ss / sy).clamp(1e-6, 1e6) } else { (t_used * 2.0).min(1e6) };

        u = cand;
        cost = c_new;
        grad = g_new;
        trace.push(cost);
        if decrease < DECREASE_TOL {
            break;
        }
    }
    Ok(Descent {
        controls: u,
        cost,
        grad_norm,
        iterations,
        trace,
    })
}

/// Dead-beat force sequence that drives the velocity towards `target`.
fn velocity_profile(z_init: PmState, target: Vec3, n: usize, problem: &MpcProblem) -> Vec<Vec3> {
    let m = &problem.model;
    let mut x = z_init;
    (0..n)
        .map(|_| {
            let f = m.project((target - x.vel) * (m.mass / m.dt));
            x = m.step(x, f);
            f
        })
        .collect()
}

fn starts(z_init: PmState, warm_start: Option<&[Vec3]>, problem: &MpcProblem) -> Vec<(StartKind, Vec<Vec3>)> {
    let n = problem.horizon();
    let mut out = Vec::new();
    if let Some(w) = warm_start {
        if w.len() == n {
            out.push((StartKind::WarmStart, w.to_vec()));
        }
    }
    out.push((StartKind::Zero, vec![Vec3::ZERO; n]));
    out.push((StartKind::Brake, velocity_profile(z_init, Vec3::ZERO, n, problem)));
    let v = problem.model.v_max;
    let mut dirs = vec![
        Vec3::new(v, 0.0, 0.0),
        Vec3::new(-v, 0.0, 0.0),
        Vec3::new(0.0, v, 0.0),
        Vec3::new(0.0, -v, 0.0),
    ];
    if !problem.model.planar {
        dirs.push(Vec3::new(0.0, 0.0, v));
        dirs.push(Vec3::new(0.0, 0.0, -v));
    }
    for d in dirs {
        out.push((StartKind::Escape, velocity_profile(z_init, d, n, problem)));
    }
    out
}

/// Solves the horizon problem from `z_init`.
///
/// Descends from the warm start (if any), from zero forces, from a braking
/// profile and from axis-aligned escape profiles, then keeps the best result:
/// feasible before infeasible, lower cost first.
pub fn solve(
    z_init: PmState,
    params: &MpcParams,
    problem: &MpcProblem,
    warm_start: Option<&[Vec3]>,
) -> Result<MpcSolution> {
    params.check(problem)?;
    let candidates = starts(z_init, warm_start, problem);
    let tried = candidates.len();
    let mut best: Option<MpcSolution> = None;
    for (kind, start) in candidates {
        let d = descend(start, z_init, params, problem)?;
        let states = rollout(&d.controls, z_init, problem);
        let (feasible, violation) = check_states(&states, params, problem);
        let sol = MpcSolution {
            controls: d.controls,
            states,
            status: if feasible {
                SolveStatus::Feasible
            } else {
                SolveStatus::Infeasible
            },
            cost: d.cost,
            max_violation: violation,
            diagnostics: SolverDiagnostics {
                iterations: d.iterations,
                grad_norm: d.grad_norm,
                cost_trace: d.trace,
                start: kind,
                starts_tried: tried,
            },
        };
        let better = match &best {
            None => true,
            Some(b) => match (sol.is_feasible(), b.is_feasible()) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => sol.cost < b.cost,
                (false, false) => (sol.max_violation, sol.cost) < (b.max_violation, b.cost),
            },
        };
        if better {
            best = Some(sol);
        }
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Axis, BoxObstacle};
    use crate::mpc::{MpcConfig, PointMassModel};

    fn problem() -> MpcProblem {
        MpcProblem::new(
            MpcConfig::default(),
            PointMassModel {
                mass: 1.0,
                dt: 0.05,
                v_max: 0.5,
                f_max: 5.0,
                planar: true,
            },
        )
        .unwrap()
    }

    #[test]
    fn reaches_nearby_goal_and_stops() {
        let p = problem();
        let z = PmState {
            pos: Vec3::new(0.4, 0.1, 0.02),
            vel: Vec3::ZERO,
        };
        let goal = z.pos + Vec3::new(0.1, 0.0, 0.0);
        let params = MpcParams::free(goal, 8, Vec3::splat(0.02));
        let sol = solve(z, &params, &p, None).unwrap();
        assert!(sol.is_feasible());
        let last = sol.states.last().unwrap();
        assert!(last.pos.distance(goal) < 0.02, "final distance {}", last.pos.distance(goal));
        assert!(last.vel.norm() < 0.05, "final speed {}", last.vel.norm());
    }

    #[test]
    fn stationary_optimum_at_goal() {
        let p = problem();
        let goal = Vec3::new(0.4, 0.4, 0.02);
        let z = PmState {
            pos: goal,
            vel: Vec3::ZERO,
        };
        let params = MpcParams::free(goal, 8, Vec3::splat(0.02));
        let sol = solve(z, &params, &p, None).unwrap();
        assert!(sol.cost < 1e-12);
        assert!(sol.controls.iter().all(|u| u.norm() < 1e-6));
        assert_eq!(sol.max_violation, 0.0);
    }

    #[test]
    fn cost_trace_never_increases() {
        let p = problem();
        let z = PmState {
            pos: Vec3::new(0.4, 0.1, 0.02),
            vel: Vec3::new(0.0, 0.4, 0.0),
        };
        let wall = BoxObstacle {
            center: Vec3::new(0.4, 0.25, 0.02),
            half_extents: Vec3::new(0.1, 0.03, 0.03),
            velocity: Vec3::ZERO,
            track_min: 0.4,
            track_max: 0.4,
            motion_axis: Axis::X,
        };
        let params = MpcParams {
            goal: Vec3::new(0.4, 0.5, 0.02),
            obstacles: vec![vec![wall]; 8],
            robot_half: Vec3::splat(0.02),
        };
        let sol = solve(z, &params, &p, None).unwrap();
        for w in sol.diagnostics.cost_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn wrong_stage_count_is_rejected() {
        let p = problem();
        let params = MpcParams::free(Vec3::ZERO, 5, Vec3::splat(0.02));
        assert!(solve(PmState::default(), &params, &p, None).is_err());
    }

    #[test]
    fn nan_parameters_diverge() {
        let p = problem();
        let params = MpcParams::free(Vec3::new(f64::NAN, 0.0, 0.0), 8, Vec3::splat(0.02));
        assert!(matches!(
            solve(PmState::default(), &params, &p, None),
            Err(Error::SolverDiverged(_))
        ));
    }

    #[test]
    fn shifted_controls_repeat_last() {
        let sol = MpcSolution {
            controls: vec![Vec3::splat(1.0), Vec3::splat(2.0), Vec3::splat(3.0)],
            states: vec![],
            status: SolveStatus::Feasible,
            cost: 0.0,
            max_violation: 0.0,
            diagnostics: SolverDiagnostics {
                iterations: 0,
                grad_norm: 0.0,
                cost_trace: vec![],
                start: StartKind::Zero,
                starts_tried: 1,
            },
        };
        assert_eq!(
            sol.shifted_controls(),
            vec![Vec3::splat(2.0), Vec3::splat(3.0), Vec3::splat(3.0)]
        );
    }
}
