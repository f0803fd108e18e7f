use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use grokklab_core::analytic::{accuracy_map, loss_quadrature, train_loss_closed, Which};
use grokklab_core::special::{erfcx, lambert_w0, reg_hyp0f1, reg_upper_gamma};

fn special(c: &mut Criterion) {
    c.bench_function("reg_hyp0f1 series z=50", |b| b.iter(|| reg_hyp0f1(2.0, black_box(50.0))));
    c.bench_function("reg_hyp0f1 asymptotic z=1e5", |b| b.iter(|| reg_hyp0f1(2.0, black_box(1e5))));
    c.bench_function("reg_upper_gamma a=25", |b| b.iter(|| reg_upper_gamma(25.0, black_box(20.0))));
    c.bench_function("lambert_w0 z=1e4", |b| b.iter(|| lambert_w0(black_box(1e4))));
    c.bench_function("erfcx x=4", |b| b.iter(|| erfcx(black_box(4.0))));
    c.bench_function("accuracy_map d_out=50", |b| b.iter(|| accuracy_map(black_box(1e-3), 1e-3, 50)));
}

fn losses(c: &mut Criterion) {
    c.bench_function("loss_quadrature gen lambda=0.9 t=1e4", |b| {
        b.iter(|| loss_quadrature(0.9, 0.01, black_box(1e4), Which::Gen))
    });
    c.bench_function("train_loss_closed lambda=0.9 t=1e4", |b| b.iter(|| train_loss_closed(0.9, 0.01, black_box(1e4))));
}

criterion_group!(benches, special, losses);
criterion_main!(benches);
