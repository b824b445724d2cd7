use criterion::{criterion_group, criterion_main, Criterion};
use safe_manip::env::ScenarioName;
use safe_manip::mpc::{initial_state, solve, total_cost};
use safe_manip::Vec3;
use safe_manip_bench::SolveFixture;

fn bench_solve(c: &mut Criterion) {
    for name in [ScenarioName::DynamicSquareObstacles, ScenarioName::DynamicRectObstacles] {
        let fx = SolveFixture::new(name, 16);
        let mut i = 0;
        c.bench_function(&format!("solve/{name}"), |b| {
            b.iter(|| {
                let params = fx.params(i);
                let z = initial_state(&fx.states[i % fx.states.len()].0);
                i += 1;
                solve(z, &params, &fx.problem, None).expect("solve")
            })
        });
    }
}

fn bench_cost(c: &mut Criterion) {
    let fx = SolveFixture::new(ScenarioName::DynamicSquareObstacles, 1);
    let params = fx.params(0);
    let z = initial_state(&fx.states[0].0);
    let u = vec![Vec3::new(1.0, 2.0, 0.0); fx.problem.horizon()];
    c.bench_function("total_cost/gradient", |b| b.iter(|| total_cost(&u, z, &params, &fx.problem)));
}

criterion_group!(benches, bench_solve, bench_cost);
criterion_main!(benches);
