use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use xbar_core::analytic::{perr_analytic, ErrorModelParams};
use xbar_core::sim::{gen_poisson_trains, max_concurrency};
use xbar_core::solver::{dense_oracle_solve, solve_channel, ChannelInstance};
use xbar_core::{ChannelConfig, LineModel};

fn instance(n: usize, line_model: LineModel) -> ChannelInstance {
    let mut cfg = ChannelConfig::default().with_rows(n);
    cfg.line_model = line_model;
    cfg.transistor.i_leak_per_fet = 1e-8 / 256.0;
    let on: Vec<usize> = (0..n).step_by(7).collect();
    let active: Vec<usize> = (0..n).step_by(3).collect();
    ChannelInstance::from_rows(cfg, &on, &active).unwrap()
}

fn channel_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_channel");
    for n in [64, 1024, 4096] {
        for (label, model) in [("distributed", LineModel::Distributed), ("lumped", LineModel::Lumped)] {
            let inst = instance(n, model);
            group.bench_with_input(BenchmarkId::new(label, n), &inst, |b, inst| {
                b.iter(|| solve_channel(black_box(inst)).unwrap())
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("dense_oracle");
    for n in [16, 64, 256] {
        let inst = instance(n, LineModel::Distributed);
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| dense_oracle_solve(black_box(inst)).unwrap())
        });
    }
    group.finish();
}

fn traffic(c: &mut Criterion) {
    let params = ErrorModelParams::new(4096, 732.0, 1e-6, 20).unwrap();
    c.bench_function("perr_analytic", |b| b.iter(|| perr_analytic(black_box(&params))));

    let trains = gen_poisson_trains(4096, 732.0, 1e-6, 0.1, 7).unwrap();
    c.bench_function("max_concurrency_300k_pulses", |b| {
        b.iter(|| max_concurrency(black_box(&trains)))
    });
}

criterion_group!(benches, channel_solvers, traffic);
criterion_main!(benches);
