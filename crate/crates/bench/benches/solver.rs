use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use robfsc::lp::{solve_with, BackendKind};
use robfsc::{
    induce_imc, robust_value_iteration, scp_solve, Policy, ScpConfig, SpecThreshold, ViOptions,
};
use robfsc_bench::{banded_lp, spacecraft, tiny};

fn value_iteration(c: &mut Criterion) {
    let mut group = c.benchmark_group("robust_value_iteration");
    for res in [10, 20, 40] {
        let m = spacecraft(6, res, res);
        let imc = induce_imc(&m, &Policy::uniform(&m)).unwrap();
        let spec = SpecThreshold::at_least(0.0);
        group.bench_with_input(BenchmarkId::from_parameter(res), &imc, |b, imc| {
            b.iter(|| robust_value_iteration(black_box(imc), &spec, ViOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn linear_programs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lp");
    let small = banded_lp(40);
    group.bench_function("dense_40", |b| {
        b.iter(|| solve_with(black_box(&small), BackendKind::Dense))
    });
    group.bench_function("sparse_40", |b| {
        b.iter(|| solve_with(black_box(&small), BackendKind::Sparse))
    });
    let large = banded_lp(10_000);
    group.sample_size(10);
    group.bench_function("sparse_10000", |b| {
        b.iter(|| solve_with(black_box(&large), BackendKind::Sparse))
    });
    group.finish();
}

fn sequential_convex_programming(c: &mut Criterion) {
    let mut group = c.benchmark_group("scp_solve");
    group.sample_size(10);
    let m = tiny(1);
    group.bench_function("tiny", |b| {
        b.iter(|| {
            scp_solve(
                black_box(&m),
                &SpecThreshold::at_least(10.0),
                1,
                &ScpConfig::default(),
            )
            .unwrap()
        })
    });
    let sc = spacecraft(4, 10, 8);
    for k in [1, 2] {
        group.bench_with_input(BenchmarkId::new("spacecraft_4x10", k), &k, |b, &k| {
            b.iter(|| {
                scp_solve(
                    black_box(&sc),
                    &SpecThreshold::at_least(1.0),
                    k,
                    &ScpConfig::default(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    value_iteration,
    linear_programs,
    sequential_convex_programming
);
criterion_main!(benches);
