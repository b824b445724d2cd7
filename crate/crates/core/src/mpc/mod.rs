//! Finite-horizon MPC on the point-mass model with smoothed rectangular
//! clearance constraints.

mod cost;
mod model;
mod problem;
mod smooth;
mod solver;

pub use cost::{evaluate, rollout, total_cost, CostBreakdown};
pub use model::{dynamics_step, PmState, PointMassModel};
pub use problem::{initial_state, MpcConfig, MpcParams, MpcProblem};
pub use smooth::{clearance_exact, clearance_smooth, smooth_max, smooth_max_with_grad};
pub use solver::{check_feasible, check_states, solve, MpcSolution, SolveStatus, SolverDiagnostics, StartKind};
