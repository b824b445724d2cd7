use serde::{Deserialize, Serialize};

use crate::env::{integrate, ScenarioConfig, Vec3};

/// Position and velocity of the point mass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PmState {
    pub pos: Vec3,
    pub vel: Vec3,
}

/// Double-integrator model `ẋ = v, v̇ = F/m`, discretized by semi-implicit Euler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMassModel {
    pub mass: f64,
    pub dt: f64,
    pub v_max: f64,
    pub f_max: f64,
    pub planar: bool,
}

impl PointMassModel {
    pub fn from_scenario(scenario: &ScenarioConfig) -> Self {
        let p = &scenario.physics;
        Self {
            mass: p.mass,
            dt: p.dt,
            v_max: p.v_max,
            f_max: p.f_max,
            planar: scenario.planar(),
        }
    }

    /// `v' = clamp(v + F/m·dt, ±v_max)`, `p' = p + v'·dt`.
    pub fn step(&self, x: PmState, force: Vec3) -> PmState {
        let (pos, vel) = integrate(x.pos, x.vel, force, self.mass, self.dt, self.v_max);
        PmState { pos, vel }
    }

    /// Per-axis mask of velocity components left unclamped by `step`.
    pub fn unclamped(&self, x: PmState, force: Vec3) -> Vec3 {
        let raw = x.vel + force * (self.dt / self.mass);
        raw.map(|v| if v.abs() > self.v_max { 0.0 } else { 1.0 })
    }

    /// Projects a force onto the actuator box (and the plane, if planar).
    pub fn project(&self, force: Vec3) -> Vec3 {
        let mut f = force.clamp_abs(self.f_max);
        if self.planar {
            f.z = 0.0;
        }
        f
    }

    /// Maximal braking force towards zero velocity.
    pub fn braking_force(&self, vel: Vec3) -> Vec3 {
        self.project(vel * (-self.mass / self.dt))
    }
}

/// Free-function form of [`PointMassModel::step`].
pub fn dynamics_step(x: PmState, force: Vec3, model: &PointMassModel) -> PmState {
    model.step(x, force)
}
