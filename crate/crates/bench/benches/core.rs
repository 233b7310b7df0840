use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ridge_anova::sim::{ridge_fit, sample_orthogonal};
use ridge_anova::theory::linear::{risk_decomposition, variance_components};
use ridge_anova::{resolvent_moments, solve_fixed_point, ActivationSpec, ModelParams};
use ridge_anova_bench::ridge_problem;

fn moments(c: &mut Criterion) {
    c.bench_function("resolvent_moments", |b| {
        b.iter(|| resolvent_moments(black_box(0.8), black_box(0.01)).unwrap())
    });
    c.bench_function("solve_fixed_point", |b| {
        b.iter(|| solve_fixed_point(black_box(0.8), black_box(1.25), 0.004, 0.006).unwrap())
    });
    let p = ModelParams::new(1.0, 0.09, 0.8, 1.0, 0.01).unwrap();
    c.bench_function("risk_and_components", |b| {
        b.iter(|| (risk_decomposition(black_box(&p)).unwrap(), variance_components(black_box(&p)).unwrap()))
    });
}

fn ridge(c: &mut Criterion) {
    let mut g = c.benchmark_group("ridge_fit");
    let act = ActivationSpec::identity();
    for &(n, d, p) in &[(100, 100, 80), (400, 200, 160)] {
        let (x, y, w) = ridge_problem(n, d, p, 7);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{d}x{p}")), &(), |b, _| {
            b.iter(|| ridge_fit(&x, &y, &w, 0.01, &act).unwrap())
        });
    }
    g.finish();
}

fn haar(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_orthogonal");
    for &d in &[50usize, 200] {
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            b.iter(|| sample_orthogonal(d, d * 4 / 5, &mut rng).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, moments, ridge, haar);
criterion_main!(benches);
