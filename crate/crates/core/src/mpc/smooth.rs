//! Boltzmann smooth maximum and the rectangular clearance function built on it.

use crate::env::{BoxObstacle, Vec3};

/// Boltzmann-weighted mean `Σ xᵢ e^{αxᵢ} / Σ e^{αxᵢ}`, shifted by the max
/// for overflow safety. Tends to `max` as `alpha → ∞`, equals the mean at 0.
///
/// Panics on an empty slice.
pub fn smooth_max(values: &[f64], alpha: f64) -> f64 {
    smooth_max_with_grad(values, alpha, &mut [])
}

/// Smooth maximum that also writes `∂S/∂xᵢ = wᵢ(1 + α(xᵢ − S))` into `grad`
/// when `grad` has the same length as `values`.
pub fn smooth_max_with_grad(values: &[f64], alpha: f64, grad: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "smooth_max of empty slice");
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in values {
        let e = (alpha * (x - peak)).exp();
        num += x * e;
        den += e;
    }
    let s = num / den;
    if grad.len() == values.len() {
        for (g, &x) in grad.iter_mut().zip(values) {
            let w = (alpha * (x - peak)).exp() / den;
            *g = w * (1.0 + alpha * (x - s));
        }
    }
    s
}

/// Normalized axis offsets `|pᵢ − cᵢ| / (obstacle halfᵢ + robot halfᵢ)`.
fn ratios(pos: Vec3, obstacle: &BoxObstacle, robot_half: Vec3) -> ([f64; 3], [f64; 3]) {
    let d = pos - obstacle.center;
    let den = obstacle.inflated_half_extents(robot_half);
    let mut r = [0.0; 3];
    let mut dr = [0.0; 3];
    for i in 0..3 {
        r[i] = d[i].abs() / den[i];
        dr[i] = d[i].signum() / den[i];
        if d[i] == 0.0 {
            dr[i] = 0.0;
        }
    }
    (r, dr)
}

/// Exact clearance `½·max(|x−x_o|/(w_o+w_r), |y−y_o|/(h_o+h_r), |z−z_o|/(d_o+d_r))`.
/// The inflated box surface is the `0.5` level set; `≥ 0.5` is safe.
pub fn clearance_exact(pos: Vec3, obstacle: &BoxObstacle, robot_half: Vec3) -> f64 {
    let (r, _) = ratios(pos, obstacle, robot_half);
    0.5 * r[0].max(r[1]).max(r[2])
}

/// Smooth clearance and its gradient with respect to `pos`.
pub fn clearance_smooth(pos: Vec3, obstacle: &BoxObstacle, robot_half: Vec3, alpha: f64) -> (f64, Vec3) {
    let (r, dr) = ratios(pos, obstacle, robot_half);
    let mut ds = [0.0; 3];
    let s = smooth_max_with_grad(&r, alpha, &mut ds);
    let grad = Vec3::new(0.5 * ds[0] * dr[0], 0.5 * ds[1] * dr[1], 0.5 * ds[2] * dr[2]);
    (0.5 * s, grad)
}
