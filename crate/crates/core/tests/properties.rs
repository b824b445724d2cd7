mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng as _;
use safe_manip::controller::{act, ControllerState};
use safe_manip::env::{
    in_collision, is_success, observe, predict_obstacles, reset, reward, step, ScenarioName, Vec3,
};
use safe_manip::mpc::{
    check_feasible, clearance_exact, initial_state, smooth_max, solve, MpcParams,
};
use safe_manip::nn::{Activation, Mlp};
use safe_manip::planner::{
    assign, assignment_cost, relabel_and_store, select_hindsight_goal, AgentConfig, DdpgAgent, HerStrategy,
    HggConfig, ReplayBuffer, Trajectory, Transition,
};
use safe_manip::seed;
use safe_manip::Config;

fn scenario_strategy() -> impl Strategy<Value = ScenarioName> {
    prop::sample::select(ScenarioName::ALL.to_vec())
}

fn action_strategy() -> impl Strategy<Value = Vec3> {
    (-1.0..=1.0f64, -1.0..=1.0f64, -1.0..=1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn step_is_deterministic_and_bounded(
        name in scenario_strategy(),
        seed_value in any::<u64>(),
        actions in prop::collection::vec(action_strategy(), 1..60),
    ) {
        let sc = scenario(name);
        let (mut s, _) = reset(&sc, seed_value).unwrap();
        for a in actions {
            let (n1, c1) = step(&s, a, &sc);
            let (n2, c2) = step(&s, a, &sc);
            prop_assert_eq!(&n1, &n2);
            prop_assert_eq!(c1, c2);
            prop_assert!(n1.object_vel.max_abs() <= sc.v_max() + 1e-12);
            prop_assert!(sc.in_workspace(n1.object_pos));
            for ob in &n1.obstacles {
                let c = ob.center[ob.motion_axis.index()];
                prop_assert!(c >= ob.track_min && c <= ob.track_max);
            }
            let brute = n1.obstacles.iter().any(|ob| {
                aabb_overlap(n1.object_pos, sc.object_half_extents(), ob.center, ob.half_extents)
            });
            prop_assert_eq!(c1, brute);
            s = n1;
        }
    }

    #[test]
    fn prediction_matches_simulator(name in scenario_strategy(), seed_value in any::<u64>()) {
        let sc = scenario(name);
        let (s, _) = reset(&sc, seed_value).unwrap();
        let predicted = predict_obstacles(&s, 8, sc.dt());
        let mut cur = s.clone();
        for stage in &predicted {
            cur = step(&cur, Vec3::ZERO, &sc).0;
            prop_assert_eq!(stage, &cur.obstacles);
        }
    }

    #[test]
    fn smooth_max_bounds_and_alpha_monotone(
        xs in prop::collection::vec(-5.0..5.0f64, 3),
        a1 in 0.0..50.0f64,
        da in 0.0..50.0f64,
    ) {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s1 = smooth_max(&xs, a1);
        let s2 = smooth_max(&xs, a1 + da);
        prop_assert!(s1 >= lo - 1e-12 && s1 <= hi + 1e-12);
        prop_assert!(s2 >= s1 - 1e-12);
    }

    #[test]
    fn forward_is_pure_and_unit_tau_copies(seed_value in any::<u64>(), x in prop::collection::vec(-2.0..2.0f64, 4)) {
        let net = Mlp::new(&[4, 6, 2], Activation::Tanh, seed_value).unwrap();
        prop_assert_eq!(net.predict(&x).unwrap(), net.predict(&x).unwrap());
        let mut other = Mlp::new(&[4, 6, 2], Activation::Tanh, seed_value.wrapping_add(1)).unwrap();
        other.soft_update_from(&net, 1.0);
        prop_assert_eq!(other, net);
    }

    #[test]
    fn critic_targets_stay_in_range(r in prop::sample::select(vec![-5.0, -1.0, 0.0]), q in -1e3..1e3f64) {
        let agent = DdpgAgent::new(6, &AgentConfig { hidden: vec![4], ..AgentConfig::default() }, 0).unwrap();
        let t = agent.critic_target(r, q);
        prop_assert!(t >= agent.value_floor() && t <= 0.0);
    }

    #[test]
    fn hungarian_beats_random_injections(
        k in 1usize..7,
        extra in 0usize..3,
        seed_value in any::<u64>(),
    ) {
        let mut rng = seed::rng(seed_value);
        let cost: Vec<Vec<f64>> = (0..k).map(|_| (0..k + extra).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        let a = assign(&cost).unwrap();
        let mut seen = a.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), k);
        let best = assignment_cost(&cost, &a);
        for _ in 0..20 {
            let mut cols: Vec<usize> = (0..k + extra).collect();
            for i in 0..cols.len() {
                let j = rng.random_range(i..cols.len());
                cols.swap(i, j);
            }
            prop_assert!(best <= assignment_cost(&cost, &cols[..k]) + 1e-9);
        }
        if k + extra <= 7 {
            prop_assert!((best - brute_force_assignment(&cost)).abs() < 1e-9);
        }
    }

    #[test]
    fn hindsight_goal_ignores_value_offset(
        pts in prop::collection::vec((0.0..0.8f64, 0.0..0.8f64), 1..20),
        c0 in -20.0..20.0f64,
        target in (0.0..0.8f64, 0.0..0.8f64),
    ) {
        let sc = scenario(ScenarioName::DynamicRectObstacles);
        let (s0, _) = reset(&sc, 0).unwrap();
        let state = |x: f64, y: f64| {
            let mut s = s0.clone();
            s.object_pos = Vec3::new(x, y, 0.02);
            s
        };
        let mut traj = Trajectory::new(state(pts[0].0, pts[0].1), Vec3::ZERO);
        for &(x, y) in &pts[1..] {
            traj.record(Vec3::ZERO, -1.0, false, state(x, y));
        }
        let v = |_: &safe_manip::EnvState, g: Vec3| -(g.x * 3.0 + g.y).abs();
        let shifted = |s: &safe_manip::EnvState, g: Vec3| v(s, g) + c0;
        let cfg = HggConfig::default();
        let goal = Vec3::new(target.0, target.1, 0.02);
        let a = select_hindsight_goal(&traj, goal, &cfg, &v).unwrap();
        let b = select_hindsight_goal(&traj, goal, &cfg, &shifted).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn exact_clearance_sign_matches_overlap(
        name in scenario_strategy(),
        seed_value in any::<u64>(),
        p in (-0.1..0.9f64, -0.1..0.9f64, -0.1..0.4f64),
    ) {
        let sc = scenario(name);
        let (s, _) = reset(&sc, seed_value).unwrap();
        let pos = Vec3::new(p.0, p.1, p.2);
        let half = sc.object_half_extents();
        for ob in &s.obstacles {
            let h = clearance_exact(pos, ob, half);
            prop_assert_eq!(h < 0.5, aabb_overlap(pos, half, ob.center, ob.half_extents));
        }
    }

    #[test]
    fn her_final_goal_and_collision_branch(name in scenario_strategy(), seed_value in any::<u64>()) {
        let audit = her_audit(name, 2, seed_value);
        prop_assert!(audit.last_checked + audit.collided_checked > 0);
        prop_assert_eq!(audit.last_wrong, 0);
        prop_assert_eq!(audit.collided_wrong, 0);
    }
}

#[test]
fn reward_codomain_over_random_steps() {
    let mut rng = seed::rng(42);
    let mut seen = [false; 3];
    let mut steps = 0;
    let mut episode = 0u64;
    while steps < 100_000 {
        let sc = scenario(ScenarioName::ALL[episode as usize % 4]);
        let (mut s, goal) = reset(&sc, episode).unwrap();
        episode += 1;
        for _ in 0..sc.physics.episode_len {
            let a = Vec3::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            let (next, collided) = step(&s, a, &sc);
            let r = reward(next.object_pos, goal, collided, &sc);
            let idx = [sc.physics.eta, -1.0, 0.0].iter().position(|&v| v == r);
            assert!(idx.is_some(), "reward {r} outside the codomain");
            seen[idx.unwrap()] = true;
            s = next;
            steps += 1;
        }
    }
    assert!(seen[0] && seen[1]);
}

#[test]
fn her_rewards_are_recomputed() {
    let sc = scenario(ScenarioName::DynamicSquareObstacles);
    let agent = DdpgAgent::new(sc.observation_len(), &AgentConfig { hidden: vec![8], ..AgentConfig::default() }, 0).unwrap();
    let mut rng = seed::rng(0);
    let mut buffer = ReplayBuffer::new(100_000);
    for e in 0..30 {
        let (s0, goal) = reset(&sc, e).unwrap();
        let traj = safe_manip::planner::run_episode(&agent, &sc, s0, goal, true, &mut rng).unwrap();
        relabel_and_store(&mut buffer, &traj, HerStrategy::Future(4), &sc, &mut rng);
    }
    let n = sc.observation_len();
    for t in buffer.iter_oldest_first() {
        let g = Vec3::new(t.obs_goal[n - 3], t.obs_goal[n - 2], t.obs_goal[n - 1]);
        let expected = reward(t.achieved_goal, g, t.collided, &sc);
        assert_eq!(t.reward, expected);
        if t.collided {
            assert_eq!(t.reward, sc.physics.eta);
        }
    }
}

#[test]
fn replay_capacity_and_eviction() {
    let mut buffer = ReplayBuffer::new(7);
    for i in 0..20 {
        buffer.push(Transition {
            obs_goal: vec![i as f64],
            action: Vec3::ZERO,
            reward: 0.0,
            next_obs_goal: vec![],
            collided: false,
            achieved_goal: Vec3::ZERO,
        });
        assert!(buffer.len() <= 7);
    }
    let kept: Vec<f64> = buffer.iter_oldest_first().map(|t| t.obs_goal[0]).collect();
    assert_eq!(kept, (13..20).map(f64::from).collect::<Vec<_>>());
}

#[test]
fn line_search_never_increases_cost_and_warm_start_keeps_feasibility() {
    for name in PLANAR {
        let sc = scenario(name);
        let pb = problem(&sc);
        for seed_value in 0..20 {
            let (s, goal) = reset(&sc, seed_value).unwrap();
            let params = MpcParams::from_env(&s, goal, &pb, &sc);
            let z = initial_state(&s);
            let sol = solve(z, &params, &pb, None).unwrap();
            assert!(sol.diagnostics.cost_trace.windows(2).all(|w| w[1] <= w[0]));
            if sol.is_feasible() {
                let again = solve(z, &params, &pb, Some(&sol.controls)).unwrap();
                assert!(again.is_feasible());
                assert!(again.cost <= sol.cost + 1e-12);
                assert!(check_feasible(&again, &params, &pb).0);
            }
        }
    }
}

#[test]
fn free_space_goal_within_reach_is_reached() {
    let cfg = Config::builtin();
    let mut sc = scenario(ScenarioName::DynamicRectObstacles);
    sc.geometry.obstacles.clear();
    let pb = problem(&sc);
    let ctrl_cfg = cfg.controller.bind(&pb);
    let mut rng = seed::rng(9);
    for _ in 0..100 {
        let (mut s, _) = reset(&sc, 0).unwrap();
        let r = rng.random_range(0.0..ctrl_cfg.reach());
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let goal = s.object_pos + Vec3::new(r * th.cos(), r * th.sin(), 0.0);
        let goal = sc.clamp_to_workspace(goal);
        let mut ctrl = ControllerState::default();
        let mut reached = false;
        for _ in 0..3 * pb.horizon() {
            let (a, d) = act(&s, goal, None, &pb, &mut ctrl, &sc, &cfg.controller).unwrap();
            assert!(d.fallback_index >= 1 && d.fallback_index <= pb.horizon());
            s = step(&s, a, &sc).0;
            if is_success(s.object_pos, goal, &sc) {
                reached = true;
                break;
            }
        }
        assert!(reached, "goal {goal:?} not reached");
    }
}

#[test]
fn act_is_deterministic() {
    let cfg = Config::builtin();
    let sc = scenario(ScenarioName::DynamicSquareObstacles);
    let pb = problem(&sc);
    let agent = DdpgAgent::new(sc.observation_len(), &AgentConfig { hidden: vec![16], ..AgentConfig::default() }, 3).unwrap();
    let (s, goal) = reset(&sc, 4).unwrap();
    let mut c1 = ControllerState::default();
    let mut c2 = ControllerState::default();
    let r1 = act(&s, goal, Some(&agent), &pb, &mut c1, &sc, &cfg.controller).unwrap();
    let r2 = act(&s, goal, Some(&agent), &pb, &mut c2, &sc, &cfg.controller).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(c1, c2);
    assert_eq!(observe(&s, goal).len(), sc.observation_len());
}

#[test]
fn feasible_plans_have_no_stage_collisions() {
    // Feasibility is decided at the stage states themselves.
    for name in PLANAR {
        let sc = scenario(name);
        let pb = problem(&sc);
        for seed_value in 0..30 {
            let (s, goal) = reset(&sc, seed_value).unwrap();
            let params = MpcParams::from_env(&s, goal, &pb, &sc);
            let sol = solve(initial_state(&s), &params, &pb, None).unwrap();
            if sol.is_feasible() {
                for (k, stage) in params.obstacles.iter().enumerate() {
                    assert!(!in_collision(sol.states[k + 1].pos, params.robot_half, stage));
                }
            }
        }
    }
}
