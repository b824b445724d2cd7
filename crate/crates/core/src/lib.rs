//! Safe manipulation among moving box obstacles: a point-mass simulator, a
//! goal-conditioned RL planner trained with hindsight goal generation, and an
//! MPC actor that executes the planner's intermediate goals collision-free.

// Validation uses `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod controller;
pub mod env;
pub mod error;
pub mod harness;
pub mod mpc;
pub mod nn;
pub mod planner;
pub mod seed;

pub use config::Config;
pub use controller::{act, intermediate_goal, no_action, ControllerConfig, ControllerState, StepDiagnostics};
pub use env::{BoxObstacle, EnvState, ScenarioConfig, ScenarioName, Vec3};
pub use error::{Error, Result};
pub use harness::{ControllerKind, EvalReport};
pub use mpc::{MpcConfig, MpcProblem, MpcSolution};
pub use planner::{AgentConfig, DdpgAgent, HggConfig};
