//! Small 3D vector and axis-aligned box primitives.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A point or velocity in the table frame (meters, or meters/second).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn zip_map(self, other: Vec3, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(f(self.x, other.x), f(self.y, other.y), f(self.z, other.z))
    }

    /// Componentwise clamp into `[-limit, limit]`.
    pub fn clamp_abs(self, limit: f64) -> Self {
        self.map(|v| v.clamp(-limit, limit))
    }

    pub fn clamp(self, lo: Vec3, hi: Vec3) -> Self {
        Self::new(
            self.x.clamp(lo.x, hi.x),
            self.y.clamp(lo.y, hi.y),
            self.z.clamp(lo.z, hi.z),
        )
    }

    pub fn abs(self) -> Self {
        self.map(f64::abs)
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Horizontal axis an obstacle slides along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Axis-aligned box obstacle sliding back and forth on a straight track.
///
/// `half_extents` are measured from the center to each face. The center's
/// coordinate along `motion_axis` always stays inside `[track_min, track_max]`;
/// reaching either end reverses the velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxObstacle {
    pub center: Vec3,
    pub half_extents: Vec3,
    pub velocity: Vec3,
    pub track_min: f64,
    pub track_max: f64,
    pub motion_axis: Axis,
}

impl BoxObstacle {
    pub fn is_static(&self) -> bool {
        self.velocity == Vec3::ZERO
    }

    /// Advance the center by one tick, reflecting elastically off the track ends.
    pub fn advance(&self, dt: f64) -> BoxObstacle {
        let mut next = *self;
        if self.is_static() {
            return next;
        }
        let axis = self.motion_axis.index();
        let mut pos = self.center[axis] + self.velocity[axis] * dt;
        let mut vel = self.velocity[axis];
        // A single tick never covers more than the track length, so one
        // reflection per end is enough; the loop guards degenerate configs.
        for _ in 0..4 {
            if pos > self.track_max {
                pos = 2.0 * self.track_max - pos;
                vel = -vel.abs();
            } else if pos < self.track_min {
                pos = 2.0 * self.track_min - pos;
                vel = vel.abs();
            } else {
                break;
            }
        }
        next.center[axis] = pos.clamp(self.track_min, self.track_max);
        next.velocity[axis] = vel;
        next
    }

    /// Half-extents grown by another box's half-extents (Minkowski sum of boxes).
    pub fn inflated_half_extents(&self, other_half: Vec3) -> Vec3 {
        self.half_extents + other_half
    }

    /// Strict interior overlap between this box and a box of `half` centered at `pos`.
    /// Touching faces do not count.
    pub fn overlaps(&self, pos: Vec3, half: Vec3) -> bool {
        let d = (pos - self.center).abs();
        let lim = self.inflated_half_extents(half);
        d.x < lim.x && d.y < lim.y && d.z < lim.z
    }
}
