//! Scenario definitions and the TOML configuration schema.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::geometry::{Axis, Vec3};
use crate::error::{Error, Result};

/// The four table-top scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioName {
    DynamicSquareObstacles,
    DynamicMixedObstacles,
    DynamicRectObstacles,
    DynamicLiftedObstacles,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::DynamicSquareObstacles,
        ScenarioName::DynamicMixedObstacles,
        ScenarioName::DynamicRectObstacles,
        ScenarioName::DynamicLiftedObstacles,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::DynamicSquareObstacles => "DynamicSquareObstacles",
            ScenarioName::DynamicMixedObstacles => "DynamicMixedObstacles",
            ScenarioName::DynamicRectObstacles => "DynamicRectObstacles",
            ScenarioName::DynamicLiftedObstacles => "DynamicLiftedObstacles",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

/// Obstacle description from which `reset` samples a concrete [`BoxObstacle`].
///
/// [`BoxObstacle`]: super::geometry::BoxObstacle
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleTemplate {
    pub center: Vec3,
    pub half_extents: Vec3,
    pub motion_axis: Axis,
    pub track: [f64; 2],
    /// `[min, max]` speed in m/s; `[0, 0]` marks a static obstacle.
    pub speed: [f64; 2],
}

impl ObstacleTemplate {
    pub fn is_dynamic(&self) -> bool {
        self.speed[1] > 0.0
    }
}

/// Shared physical constants, overridable per file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub dt: f64,
    pub episode_len: usize,
    pub v_max: f64,
    pub f_max: f64,
    pub mass: f64,
    pub success_radius: f64,
    pub eta: f64,
    pub object_half_extents: Vec3,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            dt: 0.05,
            episode_len: 50,
            v_max: 0.5,
            f_max: 5.0,
            mass: 1.0,
            success_radius: 0.05,
            eta: -5.0,
            object_half_extents: Vec3::splat(0.02),
        }
    }
}

/// Geometry of one scenario as written in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGeometry {
    pub planar: bool,
    pub workspace_min: Vec3,
    pub workspace_max: Vec3,
    pub start: Vec3,
    pub goal_min: [f64; 2],
    pub goal_max: [f64; 2],
    pub goal_z: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleTemplate>,
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    pub physics: Physics,
    pub geometry: ScenarioGeometry,
}

impl ScenarioConfig {
    pub fn dt(&self) -> f64 {
        self.physics.dt
    }

    pub fn v_max(&self) -> f64 {
        self.physics.v_max
    }

    /// Largest per-axis displacement one normalized action can request.
    pub fn max_displacement(&self) -> f64 {
        self.physics.v_max * self.physics.dt
    }

    pub fn object_half_extents(&self) -> Vec3 {
        self.physics.object_half_extents
    }

    pub fn planar(&self) -> bool {
        self.geometry.planar
    }

    pub fn obstacle_count(&self) -> usize {
        self.geometry.obstacles.len()
    }

    /// Observation length: object pos/vel, 9 numbers per obstacle, goal.
    pub fn observation_len(&self) -> usize {
        3 + 3 + 9 * self.obstacle_count() + 3
    }

    pub fn clamp_to_workspace(&self, p: Vec3) -> Vec3 {
        p.clamp(self.geometry.workspace_min, self.geometry.workspace_max)
    }

    pub fn in_workspace(&self, p: Vec3) -> bool {
        self.clamp_to_workspace(p) == p
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        let g = &self.geometry;
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.name)));
        if !(p.dt > 0.0) {
            return bad(format!("dt must be > 0 (got {})", p.dt));
        }
        if !(p.success_radius > 0.0) {
            return bad(format!("success_radius must be > 0 (got {})", p.success_radius));
        }
        if !(p.eta < -1.0) {
            return bad(format!("eta must be < -1 (got {})", p.eta));
        }
        if !(p.v_max > 0.0 && p.f_max > 0.0 && p.mass > 0.0) {
            return bad("v_max, f_max and mass must be positive".into());
        }
        if p.episode_len == 0 {
            return bad("episode_len must be >= 1".into());
        }
        if !(p.object_half_extents.x > 0.0
            && p.object_half_extents.y > 0.0
            && p.object_half_extents.z > 0.0)
        {
            return bad("object_half_extents must be positive".into());
        }
        for axis in 0..3 {
            if g.workspace_min[axis] > g.workspace_max[axis] {
                return bad("workspace_min exceeds workspace_max".into());
            }
        }
        if !self.in_workspace(g.start) {
            return bad("start pose outside workspace".into());
        }
        for axis in 0..2 {
            if g.goal_min[axis] > g.goal_max[axis] {
                return bad("goal_min exceeds goal_max".into());
            }
        }
        let corner_lo = Vec3::new(g.goal_min[0], g.goal_min[1], g.goal_z);
        let corner_hi = Vec3::new(g.goal_max[0], g.goal_max[1], g.goal_z);
        if !self.in_workspace(corner_lo) || !self.in_workspace(corner_hi) {
            return bad("goal region outside workspace".into());
        }
        for (i, ob) in g.obstacles.iter().enumerate() {
            let h = ob.half_extents;
            if !(h.x > 0.0 && h.y > 0.0 && h.z > 0.0) {
                return bad(format!("obstacle {i}: half_extents must be positive"));
            }
            if ob.track[0] > ob.track[1] {
                return bad(format!("obstacle {i}: track min exceeds max"));
            }
            if !(ob.speed[0] >= 0.0 && ob.speed[0] <= ob.speed[1]) {
                return bad(format!("obstacle {i}: speed range must satisfy 0 <= min <= max"));
            }
            if ob.is_dynamic() && ob.track[0] == ob.track[1] {
                return bad(format!("obstacle {i}: dynamic obstacle needs a non-empty track"));
            }
        }
        Ok(())
    }
}

/// Top-level scenario file: `[physics]` plus `[scenarios.<Name>]` tables.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioFile {
    pub physics: Physics,
    pub scenarios: BTreeMap<String, ScenarioGeometry>,
}

impl ScenarioFile {
    pub fn resolve(&self, name: ScenarioName) -> Result<ScenarioConfig> {
        let geometry = self
            .scenarios
            .iter()
            .find(|(k, _)| k.as_str() == name.as_str())
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Config(format!("scenario '{name}' missing from config")))?;
        let cfg = ScenarioConfig {
            name,
            physics: self.physics.clone(),
            geometry,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects tables whose key is not a known scenario name.
    pub fn check_names(&self) -> Result<()> {
        for key in self.scenarios.keys() {
            key.parse::<ScenarioName>()?;
        }
        Ok(())
    }
}
