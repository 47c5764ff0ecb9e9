use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use semiexp::simulate::{draw_samples, estimate_decomposition, estimate_naive, max_jump_exact};
use semiexp::{MMax, SampleKind};
use semiexp_bench::{config, law};

fn samplers(c: &mut Criterion) {
    let law = law();
    c.bench_function("draw 1e4 raw", |b| b.iter(|| draw_samples(&law, SampleKind::Raw, 10_000, black_box(1)).unwrap()));
    c.bench_function("build tilted table", |b| {
        b.iter(|| law.build_tilted_table(black_box(6.0), 0.4, 2048).unwrap())
    });
}

fn estimators(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimators");
    group.sample_size(10);
    let cfg = config(10, 45.0, 20_000);
    group.bench_function("naive n=10", |b| b.iter(|| estimate_naive(black_box(&cfg)).unwrap()));
    group.bench_function("decomposition n=10", |b| {
        b.iter(|| estimate_decomposition(black_box(&cfg), MMax::Fixed(10)).unwrap())
    });
    let law = law();
    group.bench_function("max_jump_exact", |b| b.iter(|| max_jump_exact(&law, black_box(1000), 500.0).unwrap()));
    group.finish();
}

criterion_group!(benches, samplers, estimators);
criterion_main!(benches);
