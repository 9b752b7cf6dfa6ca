use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pbb_core::classical::{trace_boundary_with, Theory};
use pbb_core::mcwf::{run_ensemble, TrajectorySettings};
use pbb_core::{Execution, PureState, SystemParams};

fn modes() -> Vec<(&'static str, Execution)> {
    let mut m = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        m.push(("parallel", Execution::Parallel { threads: 0 }));
    }
    m
}

fn ensemble(c: &mut Criterion) {
    let p = SystemParams::new(20.0, 10.0, 5.0);
    let settings = TrajectorySettings::new(5.0, 0.1);
    let init = PureState::ground(30);
    let mut group = c.benchmark_group("ensemble_8x5");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_ensemble(&init, &p, &settings, 8, 0, exec).unwrap())
        });
    }
    group.finish();
}

fn boundary(c: &mut Criterion) {
    let base = SystemParams::new(100.0, 1.0, 0.0);
    let grid: Vec<f64> = (1..=64).map(|k| k as f64).collect();
    let mut group = c.benchmark_group("neoclassical_boundary_64");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| trace_boundary_with(exec, Theory::Neoclassical, &base, &grid).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ensemble, boundary);
criterion_main!(benches);
