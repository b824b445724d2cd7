use serde::{Deserialize, Serialize};

use crate::env::{state_to_goal, EnvState, Vec3};

/// One rolled-out episode: states `s_0..s_T` and the per-step records between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<EnvState>,
    pub goal: Vec3,
    pub actions: Vec<Vec3>,
    pub rewards: Vec<f64>,
    pub collided: Vec<bool>,
}

impl Trajectory {
    pub fn new(initial: EnvState, goal: Vec3) -> Self {
        Self {
            states: vec![initial],
            goal,
            actions: Vec::new(),
            rewards: Vec::new(),
            collided: Vec::new(),
        }
    }

    pub fn record(&mut self, action: Vec3, reward: f64, collided: bool, next: EnvState) {
        self.actions.push(action);
        self.rewards.push(reward);
        self.collided.push(collided);
        self.states.push(next);
    }

    /// Number of transitions `T`.
    pub fn steps(&self) -> usize {
        self.actions.len()
    }

    pub fn initial(&self) -> &EnvState {
        &self.states[0]
    }

    pub fn achieved(&self, t: usize) -> Vec3 {
        state_to_goal(&self.states[t])
    }

    pub fn achieved_goals(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.states.iter().map(state_to_goal)
    }

    /// Collision episodes: maximal runs of consecutive colliding ticks.
    pub fn collision_events(&self) -> usize {
        count_collision_events(&self.collided)
    }
}

/// Counts rising edges of the per-tick collision flag.
pub fn count_collision_events(flags: &[bool]) -> usize {
    let mut prev = false;
    let mut n = 0;
    for &f in flags {
        if f && !prev {
            n += 1;
        }
        prev = f;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collision_events_count_runs() {
        assert_eq!(count_collision_events(&[]), 0);
        assert_eq!(count_collision_events(&[false, true, true, false, true]), 2);
        assert_eq!(count_collision_events(&[true, true, true]), 1);
    }
}
