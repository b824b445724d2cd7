//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng as _;
use safe_manip::env::{BoxObstacle, EnvState, ScenarioConfig, ScenarioName, Vec3};
use safe_manip::env::reset;
use safe_manip::mpc::{clearance_exact, clearance_smooth, MpcParams, MpcProblem, PmState};
use safe_manip::env::{observe, reward, step};
use safe_manip::planner::{assign, assignment_cost, relabel_and_store, HerStrategy, ReplayBuffer, Trajectory};
use safe_manip::nn::{Activation, Mlp};
use safe_manip::seed::{self, Rng};
use safe_manip::Config;

pub fn scenario(name: ScenarioName) -> ScenarioConfig {
    Config::builtin().scenario(name).unwrap()
}

pub fn problem(sc: &ScenarioConfig) -> MpcProblem {
    MpcProblem::for_scenario(Config::builtin().mpc, sc).unwrap()
}

pub const PLANAR: [ScenarioName; 3] = [
    ScenarioName::DynamicSquareObstacles,
    ScenarioName::DynamicMixedObstacles,
    ScenarioName::DynamicRectObstacles,
];

/// Overlap of two boxes, written out per axis from raw corner coordinates.
pub fn aabb_overlap(a_center: Vec3, a_half: Vec3, b_center: Vec3, b_half: Vec3) -> bool {
    let a = a_center.to_array();
    let ah = a_half.to_array();
    let b = b_center.to_array();
    let bh = b_half.to_array();
    (0..3).all(|i| a[i] - ah[i] < b[i] + bh[i] && b[i] - bh[i] < a[i] + ah[i])
}

/// Signed distance from `p` to the surface of the inflated box, per axis max.
pub fn boundary_distance(p: Vec3, ob: &BoxObstacle, robot_half: Vec3) -> f64 {
    let d = (p - ob.center).abs();
    let w = ob.half_extents + robot_half;
    (d.x - w.x).max(d.y - w.y).max(d.z - w.z)
}

pub fn random_vec(rng: &mut Rng, lo: Vec3, hi: Vec3) -> Vec3 {
    Vec3::new(
        rng.random_range(lo.x..=hi.x),
        rng.random_range(lo.y..=hi.y),
        rng.random_range(lo.z..=hi.z),
    )
}

/// Relative error `‖a − b‖ / max(‖a‖, ‖b‖, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(floor)
}

/// Worst relative error between backward() and central differences for a
/// random net, batch and linear loss `Σ R ∘ y`.
pub fn mlp_gradient_error(seed_value: u64) -> f64 {
    let mut rng = seed::rng(seed_value);
    let depth = rng.random_range(1..=3);
    let mut sizes = vec![rng.random_range(1..=6)];
    for _ in 0..depth {
        sizes.push(rng.random_range(1..=8));
    }
    let head = [Activation::Identity, Activation::Tanh][rng.random_range(0..2)];
    let mut net = Mlp::new(&sizes, head, seed_value).unwrap();
    let batch = rng.random_range(1..=4);
    let x = Array2::from_shape_fn((batch, sizes[0]), |_| rng.random_range(-1.0..1.0));
    let r = Array2::from_shape_fn((batch, *sizes.last().unwrap()), |_| rng.random_range(-1.0..1.0));
    let loss = |net: &Mlp, x: &Array2<f64>| (net.forward_batch(x.view()).unwrap().output() * &r).sum();

    let cache = net.forward_batch(x.view()).unwrap();
    let (grads, dx) = net.backward(&cache, r.view()).unwrap();
    let analytic = grads.flatten();

    let h = 1e-6;
    let mut numeric = Vec::with_capacity(analytic.len());
    for l in 0..net.layers.len() {
        for idx in 0..net.layers[l].weight.len() {
            let orig = net.layers[l].weight.as_slice().unwrap()[idx];
            net.layers[l].weight.as_slice_mut().unwrap()[idx] = orig + h;
            let up = loss(&net, &x);
            net.layers[l].weight.as_slice_mut().unwrap()[idx] = orig - h;
            let down = loss(&net, &x);
            net.layers[l].weight.as_slice_mut().unwrap()[idx] = orig;
            numeric.push((up - down) / (2.0 * h));
        }
        for idx in 0..net.layers[l].bias.len() {
            let orig = net.layers[l].bias[idx];
            net.layers[l].bias[idx] = orig + h;
            let up = loss(&net, &x);
            net.layers[l].bias[idx] = orig - h;
            let down = loss(&net, &x);
            net.layers[l].bias[idx] = orig;
            numeric.push((up - down) / (2.0 * h));
        }
    }
    let mut numeric_dx = Vec::new();
    let mut xp = x.clone();
    for idx in 0..x.len() {
        let orig = x.as_slice().unwrap()[idx];
        xp.as_slice_mut().unwrap()[idx] = orig + h;
        let up = loss(&net, &xp);
        xp.as_slice_mut().unwrap()[idx] = orig - h;
        let down = loss(&net, &xp);
        xp.as_slice_mut().unwrap()[idx] = orig;
        numeric_dx.push((up - down) / (2.0 * h));
    }
    rel_err(&analytic, &numeric, 1e-8).max(rel_err(dx.as_slice().unwrap(), &numeric_dx, 1e-8))
}

/// Random MPC instance drawn around a reset state of a random scenario.
pub fn random_cost_instance(seed_value: u64) -> (MpcProblem, MpcParams, PmState, Vec<Vec3>) {
    let mut rng = seed::rng(seed_value);
    let name = ScenarioName::ALL[rng.random_range(0..ScenarioName::ALL.len())];
    let sc = scenario(name);
    let pb = problem(&sc);
    let (mut state, goal) = safe_manip::env::reset(&sc, seed_value).unwrap();
    let g = &sc.geometry;
    state.object_pos = random_vec(&mut rng, g.workspace_min, g.workspace_max);
    let v = pb.model.v_max * 0.9;
    state.object_vel = random_vec(&mut rng, Vec3::splat(-v), Vec3::splat(v));
    let params = MpcParams::from_env(&state, goal, &pb, &sc);
    let f = pb.model.f_max;
    // Small forces keep most stages away from the velocity clamp's kink.
    let controls = (0..pb.horizon())
        .map(|_| random_vec(&mut rng, Vec3::splat(-0.3 * f), Vec3::splat(0.3 * f)))
        .collect();
    let z = PmState {
        pos: state.object_pos,
        vel: state.object_vel,
    };
    (pb, params, z, controls)
}

pub fn cost_gradient_error(seed_value: u64) -> f64 {
    let (pb, params, z, u) = random_cost_instance(seed_value);
    let (_, grad) = safe_manip::mpc::total_cost(&u, z, &params, &pb);
    let analytic: Vec<f64> = grad.iter().flat_map(|g| g.to_array()).collect();
    let h = 1e-6;
    let mut numeric = Vec::with_capacity(analytic.len());
    for k in 0..u.len() {
        for axis in 0..3 {
            let mut up = u.clone();
            up[k][axis] += h;
            let mut down = u.clone();
            down[k][axis] -= h;
            let cu = safe_manip::mpc::total_cost(&up, z, &params, &pb).0;
            let cd = safe_manip::mpc::total_cost(&down, z, &params, &pb).0;
            numeric.push((cu - cd) / (2.0 * h));
        }
    }
    rel_err(&analytic, &numeric, 1e-6)
}

/// Minimum assignment cost by enumerating every injective map rows → columns.
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                rec(cost, row + 1, used, acc + cost[row][c], best);
                used[c] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let cols = cost.first().map_or(0, Vec::len);
    rec(cost, 0, &mut vec![false; cols], 0.0, &mut best);
    best
}

/// Collision check of a plan at 10 sub-steps per stage: the object moves on
/// the straight segment between stage positions while obstacles advance with
/// the simulator's own bounce rule.
/// Index of the first stage interval whose densely resampled motion overlaps an obstacle.
pub fn dense_plan_collision(state: &EnvState, positions: &[Vec3], robot_half: Vec3, dt: f64) -> Option<usize> {
    let mut obstacles = state.obstacles.clone();
    let mut prev = state.object_pos;
    for (k, &next) in positions.iter().enumerate() {
        for j in 1..=10 {
            let s = j as f64 / 10.0;
            let p = prev + (next - prev) * s;
            for ob in &obstacles {
                let moved = ob.advance(dt * s);
                if aabb_overlap(p, robot_half, moved.center, moved.half_extents) {
                    return Some(k);
                }
            }
        }
        obstacles = obstacles.iter().map(|o| o.advance(dt)).collect();
        prev = next;
    }
    None
}

/// Hungarian cost minus brute-force minimum on random K×K matrices, K in 2..=6;
/// returns the number of disagreements beyond 1e-9.
pub fn hungarian_disagreements(seed_value: u64, per_size: usize) -> usize {
    let mut rng = seed::rng(seed_value);
    let mut bad = 0;
    for k in 2..=6 {
        for _ in 0..per_size {
            let cost: Vec<Vec<f64>> = (0..k).map(|_| (0..k).map(|_| rng.random_range(0.0..10.0)).collect()).collect();
            let got = assignment_cost(&cost, &assign(&cost).unwrap());
            bad += ((got - brute_force_assignment(&cost)).abs() > 1e-9) as usize;
        }
    }
    bad
}

/// Sign mismatches between exact clearance and box overlap over `count` random
/// points, and the worst smooth-vs-exact gap for points at least 1 cm from
/// the inflated boundary.
pub fn geometry_check(name: ScenarioName, count: usize, seed_value: u64) -> (usize, f64) {
    let sc = scenario(name);
    let half = sc.object_half_extents();
    let g = &sc.geometry;
    let lo = g.workspace_min - Vec3::splat(0.05);
    let hi = g.workspace_max + Vec3::splat(0.05);
    let (s, _) = reset(&sc, seed_value).unwrap();
    let mut rng = seed::rng(seed_value);
    let (mut mismatches, mut worst) = (0, 0.0f64);
    for i in 0..count {
        let ob = &s.obstacles[i % s.obstacles.len()];
        // Half the points are drawn close to the box so both outcomes occur.
        let p = if i % 2 == 0 {
            random_vec(&mut rng, lo, hi)
        } else {
            let w = ob.half_extents + half;
            random_vec(&mut rng, ob.center - w * 1.5, ob.center + w * 1.5)
        };
        let exact = clearance_exact(p, ob, half);
        mismatches += ((exact < 0.5) != aabb_overlap(p, half, ob.center, ob.half_extents)) as usize;
        if boundary_distance(p, ob, half).abs() >= 0.01 {
            let (smooth, _) = clearance_smooth(p, ob, half, 300.0);
            worst = worst.max((smooth - exact).abs());
        }
    }
    (mismatches, worst)
}

/// Outcome of relabeling random-action episodes.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct HerAudit {
    /// Non-collided final-strategy copies of the last transition.
    pub last_checked: usize,
    /// Of those, how many did not carry reward exactly 0.
    pub last_wrong: usize,
    /// Stored transitions (original or relabeled) that collided.
    pub collided_checked: usize,
    /// Of those, how many did not carry `eta`.
    pub collided_wrong: usize,
}

/// Random-action episodes with uniform actions, stored under `final` and
/// `future(4)` relabeling, audited against the reward branch order.
pub fn her_audit(name: ScenarioName, episodes: u64, seed_value: u64) -> HerAudit {
    let sc = scenario(name);
    let n = sc.observation_len();
    let mut rng = seed::rng(seed_value);
    let mut audit = HerAudit::default();
    for e in 0..episodes {
        let (s0, goal) = reset(&sc, seed::derive(seed_value, seed::stream::TEST, e)).unwrap();
        let mut traj = Trajectory::new(s0, goal);
        for _ in 0..sc.physics.episode_len {
            let s = traj.states.last().unwrap();
            let a = random_vec(&mut rng, Vec3::splat(-1.0), Vec3::splat(1.0));
            let (next, collided) = step(s, a, &sc);
            let r = reward(next.object_pos, goal, collided, &sc);
            traj.record(a, r, collided, next);
        }
        for strategy in [HerStrategy::Final, HerStrategy::Future(4)] {
            let mut buffer = ReplayBuffer::new(1_000_000);
            relabel_and_store(&mut buffer, &traj, strategy, &sc, &mut rng);
            let stored: Vec<_> = buffer.iter_oldest_first().collect();
            for t in &stored {
                if t.collided {
                    audit.collided_checked += 1;
                    audit.collided_wrong += (t.reward != sc.physics.eta) as usize;
                }
            }
            if strategy == HerStrategy::Final {
                let last = stored.last().unwrap();
                let g = Vec3::new(last.obs_goal[n - 3], last.obs_goal[n - 2], last.obs_goal[n - 1]);
                assert_eq!(last.obs_goal, observe(traj.states.iter().nth_back(1).unwrap(), g));
                if !last.collided {
                    audit.last_checked += 1;
                    audit.last_wrong += (last.reward != 0.0) as usize;
                }
            }
        }
    }
    audit
}
