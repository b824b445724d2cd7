//! Hindsight relabeling of finished episodes.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::replay::{ReplayBuffer, Transition};
use super::trajectory::Trajectory;
use crate::env::{observe, reward, ScenarioConfig, Vec3};
use crate::error::Error;
use crate::seed::Rng;

/// Which achieved goals replace the episode goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "k")]
pub enum HerStrategy {
    /// The goal reached at the end of the episode.
    Final,
    /// `k` goals drawn uniformly from states strictly after the transition.
    Future(usize),
}

impl fmt::Display for HerStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HerStrategy::Final => write!(f, "final"),
            HerStrategy::Future(k) => write!(f, "future({k})"),
        }
    }
}

impl FromStr for HerStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("final") {
            return Ok(HerStrategy::Final);
        }
        let k = s
            .strip_prefix("future(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|k| k.parse::<usize>().ok())
            .ok_or_else(|| Error::Config(format!("unknown HER strategy '{s}'")))?;
        if k == 0 {
            return Err(Error::Config("future(k) needs k >= 1".into()));
        }
        Ok(HerStrategy::Future(k))
    }
}

/// Relabel goals for transition `t` (from `s_t` to `s_{t+1}`).
pub fn relabel_goals(episode: &Trajectory, t: usize, strategy: HerStrategy, rng: &mut Rng) -> Vec<Vec3> {
    let last = episode.steps();
    match strategy {
        HerStrategy::Final => vec![episode.achieved(last)],
        HerStrategy::Future(k) => (0..k)
            .map(|_| episode.achieved(rng.random_range(t + 1..=last)))
            .collect(),
    }
}

/// Stores every original transition followed by its relabeled copies and
/// returns how many were pushed.
/// Rewards of relabeled copies are recomputed against the new goal; a
/// collided transition keeps `eta` under any goal.
pub fn relabel_and_store(
    buffer: &mut ReplayBuffer,
    episode: &Trajectory,
    strategy: HerStrategy,
    scenario: &ScenarioConfig,
    rng: &mut Rng,
) -> usize {
    let mut pushed = 0;
    for t in 0..episode.steps() {
        let (s, s_next) = (&episode.states[t], &episode.states[t + 1]);
        let achieved = episode.achieved(t + 1);
        let collided = episode.collided[t];
        let action = episode.actions[t];
        let mut store = |goal: Vec3| {
            pushed += 1;
            buffer.push(Transition {
                obs_goal: observe(s, goal),
                action,
                reward: reward(achieved, goal, collided, scenario),
                next_obs_goal: observe(s_next, goal),
                collided,
                achieved_goal: achieved,
            })
        };
        store(episode.goal);
        for g in relabel_goals(episode, t, strategy, rng) {
            store(g);
        }
    }
    pushed
}
