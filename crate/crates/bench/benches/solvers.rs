use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dejitter_core::synthesis::pattern;
use dejitter_core::{
    bcd_sweep, dejitter_line, dejitter_line_pixel, solve_chain, solve_chain_ternary, ChainTable,
    EnergyParams, Order, SweepKind, VectorField,
};

fn table(n: usize, l: usize) -> ChainTable {
    let cost = |a: usize, b: usize, c: usize| ((a * 31 + b * 17 + c * 7) % 101) as f64 / 101.0;
    ChainTable::from_fn(n, l, |j, a| cost(j, a, 0), cost).unwrap()
}

fn chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain");
    for l in [5, 9, 25] {
        let t = table(256, l);
        group.bench_with_input(BenchmarkId::new("pairwise", l), &t, |b, t| {
            b.iter(|| solve_chain(black_box(t)).unwrap())
        });
    }
    for l in [5, 9] {
        let t = table(256, l)
            .with_ternary_fn(|j, a, b, c| ((j + a * 3 + b * 5 + c * 7) % 13) as f64 / 13.0);
        group.bench_with_input(BenchmarkId::new("ternary", l), &t, |b, t| {
            b.iter(|| solve_chain_ternary(black_box(t)).unwrap())
        });
    }
    group.finish();
}

fn line(c: &mut Criterion) {
    let mut group = c.benchmark_group("line");
    group.sample_size(20);
    for width in [128, 256] {
        let img = pattern::scene(width, 128, 3, 1).unwrap();
        for order in [Order::First, Order::Second] {
            let prm = EnergyParams::new(0.01, 0.5, order, 3).unwrap();
            group.bench_function(BenchmarkId::new(format!("k{}", order.k()), width), |b| {
                b.iter(|| dejitter_line(black_box(&img), &prm).unwrap())
            });
        }
    }
    group.finish();
}

fn line_pixel(c: &mut Criterion) {
    let mut group = c.benchmark_group("line_pixel");
    group.sample_size(10);
    let img = pattern::scene(128, 128, 3, 2).unwrap();
    for order in [Order::First, Order::Second] {
        let prm = EnergyParams::new(4.0, 0.5, order, 3).unwrap();
        group.bench_function(
            BenchmarkId::new("128x128", format!("k{}", order.k())),
            |b| b.iter(|| dejitter_line_pixel(black_box(&img), &prm).unwrap()),
        );
    }
    group.finish();
}

fn pixel_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("pixel_sweep");
    group.sample_size(10);
    let img = pattern::scene(64, 64, 3, 3).unwrap();
    for rho in [1, 2, 3] {
        let prm = EnergyParams::new(4.0, 0.5, Order::First, rho).unwrap();
        let field = VectorField::zeros(64, 64, rho);
        group.bench_function(BenchmarkId::new("rho", rho), |b| {
            b.iter(|| bcd_sweep(black_box(&img), &field, &prm, SweepKind::OddColumns).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, chain, line, line_pixel, pixel_sweep);
criterion_main!(benches);
