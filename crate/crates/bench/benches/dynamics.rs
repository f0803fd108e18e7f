use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use grokklab_bench::fixture;
use grokklab_core::analytic::PredictionParams;
use grokklab_core::dynamics::{run_iterative, training_gram, SpectralModel};
use grokklab_core::grok::{analytic_report, DEFAULT_THRESHOLD};
use grokklab_core::rmt::eigenvalues_of;

fn engines(c: &mut Criterion) {
    let mut g = c.benchmark_group("engines");
    g.sample_size(10);
    let cfg = fixture(256, 0.5, 2e3, 40);
    let gram = training_gram(&cfg).expect("gram");
    g.bench_function("gd d_in=256 2000 steps", |b| b.iter(|| run_iterative(black_box(&cfg))));
    g.bench_function("eigendecomposition 256", |b| b.iter(|| eigenvalues_of(black_box(&gram))));
    let model = SpectralModel::new(&cfg, &gram).expect("spectral model");
    g.bench_function("spectral losses at one time", |b| b.iter(|| model.losses(black_box(500.0))));
    g.finish();
}

fn grok(c: &mut Criterion) {
    let mut g = c.benchmark_group("grok");
    g.sample_size(10);
    let p = PredictionParams::one_layer(0.9, 0.01, 1e-3);
    g.bench_function("analytic_report lambda=0.9", |b| b.iter(|| analytic_report(black_box(&p), DEFAULT_THRESHOLD)));
    g.finish();
}

criterion_group!(benches, engines, grok);
criterion_main!(benches);
