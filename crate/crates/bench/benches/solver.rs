use criterion::{criterion_group, criterion_main, Criterion};
use fastdiff::evolve::{max_stable_dt, step};
use fastdiff::inequalities::hp_estimate;
use fastdiff::initial::drift_sandwich;
use fastdiff::kernels::assemble_kernel;
use fastdiff::stationary::{meanfield_fixed_point, solve_h_star};
use fastdiff::{build_grid, ModelParams};
use std::hint::black_box;

fn stationary(c: &mut Criterion) {
    let grid = build_grid(1, 20.0, 1024).unwrap();
    let p = ModelParams::drift(1, 2.0, 0.7, 1.0).unwrap();
    c.bench_function("solve_h_star_M1024", |b| b.iter(|| solve_h_star(black_box(&p), &grid).unwrap()));

    let grid = build_grid(2, 4.0, 128).unwrap();
    let p = ModelParams::mean_field(2, 4.0, 0.95).unwrap();
    let k = assemble_kernel(&grid, 4.0).unwrap();
    let mut g = c.benchmark_group("fixed_point");
    g.sample_size(10);
    g.bench_function("lambda4_N2_M128", |b| b.iter(|| meanfield_fixed_point(black_box(&p), &k, Default::default()).unwrap()));
    g.finish();
}

fn time_step(c: &mut Criterion) {
    let grid = build_grid(1, 20.0, 512).unwrap();
    let p = ModelParams::drift(1, 2.0, 0.7, 1.0).unwrap();
    let s = solve_h_star(&p, &grid).unwrap();
    let u = drift_sandwich(&s, 0.5, 2.0).unwrap();
    let dt = 0.5 * max_stable_dt(&u, &p, None, 0.9).unwrap();
    c.bench_function("drift_step_M512", |b| b.iter(|| step(black_box(&u), &p, None, dt).unwrap()));

    let grid = build_grid(3, 200.0, 2048).unwrap();
    let s = solve_h_star(&ModelParams::drift(3, 2.0, 0.8, 1.0).unwrap(), &grid).unwrap();
    c.bench_function("hp_estimate_M2048", |b| b.iter(|| hp_estimate(black_box(&s)).unwrap()));
}

criterion_group!(benches, stationary, time_step);
criterion_main!(benches);
