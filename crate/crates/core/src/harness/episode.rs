//! Single evaluation episode under one of the three controllers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::trajlog::TickRecord;
use crate::controller::{act, ControllerConfig, ControllerState};
use crate::env::{is_success, observe, reset, step, ScenarioConfig};
use crate::error::{Error, Result};
use crate::mpc::MpcProblem;
use crate::planner::DdpgAgent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerKind {
    /// Trained policy actions applied directly.
    #[serde(rename = "hgg")]
    Hgg,
    /// MPC steering straight at the final goal.
    #[serde(rename = "mpc")]
    Mpc,
    /// Policy proposes intermediate goals, MPC executes them.
    #[serde(rename = "mpc-hgg")]
    MpcHgg,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [ControllerKind::Hgg, ControllerKind::Mpc, ControllerKind::MpcHgg];

    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Hgg => "hgg",
            ControllerKind::Mpc => "mpc",
            ControllerKind::MpcHgg => "mpc-hgg",
        }
    }

    pub fn needs_agent(self) -> bool {
        self != ControllerKind::Mpc
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown controller '{s}' (expected hgg, mpc or mpc-hgg)")))
    }
}

/// Everything an episode needs besides its seed.
#[derive(Clone, Copy)]
pub struct EpisodeSetup<'a> {
    pub scenario: &'a ScenarioConfig,
    pub controller: ControllerKind,
    pub agent: Option<&'a DdpgAgent>,
    pub problem: &'a MpcProblem,
    pub controller_config: &'a ControllerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub seed: u64,
    pub reached: bool,
    /// Collision events: maximal runs of overlapping ticks.
    pub collisions: usize,
    /// Ticks executed; the episode stops at the first success.
    pub length: usize,
    /// Steps where the solver reported feasible.
    pub feasible_steps: usize,
    /// Feasible steps whose executed transition still overlapped an obstacle.
    pub feasible_step_collisions: usize,
}

impl EpisodeOutcome {
    /// Reached the goal with at most `tolerance` collisions.
    pub fn success_under(&self, tolerance: usize) -> bool {
        self.reached && self.collisions <= tolerance
    }
}

/// Runs one episode; when `log` is given every tick is appended to it.
pub fn run_episode(setup: EpisodeSetup<'_>, seed: u64, mut log: Option<&mut Vec<TickRecord>>) -> Result<EpisodeOutcome> {
    let sc = setup.scenario;
    if setup.controller.needs_agent() && setup.agent.is_none() {
        return Err(Error::Config(format!("controller {} needs a checkpoint", setup.controller)));
    }
    let (mut state, goal) = reset(sc, seed)?;
    let mut ctrl = ControllerState::default();
    let mut out = EpisodeOutcome {
        seed,
        reached: false,
        collisions: 0,
        length: 0,
        feasible_steps: 0,
        feasible_step_collisions: 0,
    };
    let mut prev_collided = false;
    for _ in 0..sc.physics.episode_len {
        let (action, diag) = match setup.controller {
            ControllerKind::Hgg => {
                let agent = setup.agent.expect("checked above");
                (agent.policy(&observe(&state, goal))?.clamp_abs(1.0), None)
            }
            ControllerKind::Mpc | ControllerKind::MpcHgg => {
                let agent = if setup.controller == ControllerKind::MpcHgg {
                    setup.agent
                } else {
                    None
                };
                let (a, d) = act(&state, goal, agent, setup.problem, &mut ctrl, sc, setup.controller_config)?;
                (a, Some(d))
            }
        };
        let (next, collided) = step(&state, action, sc);
        let feasible = diag.as_ref().is_some_and(|d| d.status == crate::mpc::SolveStatus::Feasible);
        out.feasible_steps += feasible as usize;
        out.feasible_step_collisions += (feasible && collided) as usize;
        out.collisions += (collided && !prev_collided) as usize;
        prev_collided = collided;
        out.length += 1;
        let reached = is_success(next.object_pos, goal, sc);
        if let Some(log) = log.as_deref_mut() {
            log.push(TickRecord {
                tick: next.tick,
                position: next.object_pos,
                velocity: next.object_vel,
                goal,
                action,
                collided,
                success: reached,
                obstacles: next.obstacles.clone(),
                step: diag,
            });
        }
        state = next;
        if reached {
            out.reached = true;
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controller_names_round_trip() {
        for k in ControllerKind::ALL {
            assert_eq!(k.as_str().parse::<ControllerKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
        }
        assert!("ppo".parse::<ControllerKind>().is_err());
    }

    #[test]
    fn tolerance_rule() {
        let o = EpisodeOutcome {
            seed: 0,
            reached: true,
            collisions: 1,
            length: 10,
            feasible_steps: 0,
            feasible_step_collisions: 0,
        };
        assert!(!o.success_under(0));
        assert!(o.success_under(1));
        assert!(o.success_under(2));
    }
}
