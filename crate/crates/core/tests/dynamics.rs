//! Engine-level checks: GD against the exact spectral propagators, late-time
//! limits, and the invariants every trace must satisfy.

use grokklab_core::analytic::{wd_losses, Which};
use grokklab_core::config::{log_grid, Arch, ExperimentConfig};
use grokklab_core::dynamics::{run_iterative, run_spectral, training_gram, SpectralModel, Trace};
use grokklab_core::Error;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn config(d_in: usize, lambda: f64, eta0: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::with_lambda(d_in, lambda);
    c.eta0 = eta0;
    c.n_gen = 2000;
    c
}

fn assert_trace_invariants(t: &Trace) {
    for i in 0..t.len() {
        assert!(t.l_tr[i] >= 0.0 && t.l_gen[i] >= 0.0);
        assert!((0.0..=1.0).contains(&t.a_tr[i]) && (0.0..=1.0).contains(&t.a_gen[i]));
    }
}

#[test]
fn gd_matches_discrete_spectral_propagator() {
    let mut c = config(1000, 0.9, 0.01);
    let mut grid = vec![0.0];
    grid.extend(log_grid(1.0, 1e4, 40).unwrap());
    c.time_grid = grid;
    let trace = run_iterative(&c).unwrap();
    let model = SpectralModel::new(&c, &training_gram(&c).unwrap()).unwrap();
    for i in 0..trace.len() {
        let steps = (trace.times[i] / c.dt).round() as u64;
        let (tr, gen) = model.losses_gd(steps, c.eta0 * c.dt);
        assert!(rel(trace.l_tr[i], tr) < 1e-6, "t={} {} vs {tr}", trace.times[i], trace.l_tr[i]);
        assert!(rel(trace.l_gen[i], gen) < 1e-6);
    }
    assert_trace_invariants(&trace);
}

#[test]
fn gd_matches_discrete_propagator_with_decay_and_outputs() {
    let mut c = config(96, 1.5, 0.01);
    c.d_out = 3;
    c.gamma = 0.01;
    c.time_grid = log_grid(1.0, 3e4, 30).unwrap();
    let trace = run_iterative(&c).unwrap();
    let model = SpectralModel::new(&c, &training_gram(&c).unwrap()).unwrap();
    for i in 0..trace.len() {
        let (tr, gen) = model.losses_gd(trace.times[i] as u64, c.eta0);
        assert!(rel(trace.l_tr[i], tr) < 1e-6);
        assert!(rel(trace.l_gen[i], gen) < 1e-6);
    }
}

#[test]
fn small_step_gd_tracks_gradient_flow() {
    for &lambda in &[0.5, 1.5] {
        for &gamma in &[0.0, 0.01] {
            let mut c = config(128, lambda, 2e-5);
            c.gamma = gamma;
            c.time_grid = log_grid(500.0, 1e5, 25).unwrap();
            let it = run_iterative(&c).unwrap();
            // GD reports the step-aligned times it actually reached.
            c.time_grid = it.times.clone();
            let sp = run_spectral(&c, &training_gram(&c).unwrap()).unwrap();
            for i in 0..it.len() {
                assert!(rel(it.l_tr[i], sp.l_tr[i]) < 1e-4, "λ={lambda} γ={gamma} t={}", it.times[i]);
                assert!(rel(it.l_gen[i], sp.l_gen[i]) < 1e-4);
            }
        }
    }
}

#[test]
fn spectral_limits() {
    let mut c = config(1000, 0.5, 0.01);
    c.time_grid = vec![0.0, 1e7];
    let gram = training_gram(&c).unwrap();
    let t = run_spectral(&c, &gram).unwrap();
    assert!((t.l_gen[0] - 1.0).abs() < 0.1);
    assert!(t.l_tr[1] < 1e-12 && t.l_gen[1] < 1e-12);

    // Weight-decay floors against the MP average of the same closed form.
    c.gamma = 0.01;
    c.time_grid = vec![1e6 / c.eta0];
    let t = run_spectral(&c, &gram).unwrap();
    let tr = wd_losses(0.5, c.eta0, c.gamma, c.time_grid[0], Which::Train).unwrap();
    let gen = wd_losses(0.5, c.eta0, c.gamma, c.time_grid[0], Which::Gen).unwrap();
    assert!(rel(t.l_tr[0], tr) < 0.1, "{} vs {tr}", t.l_tr[0]);
    assert!(rel(t.l_gen[0], gen) < 0.1, "{} vs {gen}", t.l_gen[0]);
}

#[test]
fn overparameterized_plateau() {
    let mut c = ExperimentConfig::new(1000, 667);
    c.time_grid = log_grid(1.0, 1e4, 40).unwrap();
    let t = run_iterative(&c).unwrap();
    let last = t.len() - 1;
    assert!(rel(t.l_gen[last], 1.0 / 3.0) < 0.05, "{}", t.l_gen[last]);
    assert!(rel(t.l_gen_sampled.as_ref().unwrap()[last], 1.0 / 3.0) < 0.05);
    assert!(t.l_tr[last] < 1e-6);
    assert!(t.a_gen.iter().all(|&a| a < 0.95));
    assert_trace_invariants(&t);
}

#[test]
fn monotone_training_loss_all_architectures() {
    for arch in [Arch::OneLayer, Arch::TwoLayerLinear, Arch::TwoLayerTanh] {
        let mut c = config(60, 0.5, 0.01);
        c.arch = arch;
        c.d_h = 40;
        c.d_out = 2;
        c.dt = if arch == Arch::OneLayer { 1.0 } else { 20.0 };
        c.time_grid = log_grid(20.0, 4e3, 30).unwrap();
        let t = run_iterative(&c).unwrap();
        for w in t.l_tr.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{arch:?}: {} -> {}", w[0], w[1]);
        }
        assert_trace_invariants(&t);
    }
}

#[test]
fn init_rescale_law() {
    let run = |alpha: f64, seed: u64| {
        let mut c = config(1000, 0.5, 0.01);
        c.alpha = alpha;
        c.seed = seed;
        c.n_gen = 10;
        c.time_grid = vec![0.0];
        let t = run_iterative(&c).unwrap();
        (t.l_tr[0], t.l_gen[0])
    };
    for &alpha in &[0.5, 2.0] {
        let (mut num, mut den) = ((0.0, 0.0), (0.0, 0.0));
        for seed in 0..4 {
            let a = run(alpha, seed);
            let b = run(1.0, seed);
            num = (num.0 + a.0, num.1 + a.1);
            den = (den.0 + b.0, den.1 + b.1);
        }
        let expected = (1.0 + alpha * alpha) / 2.0;
        assert!(rel(num.0 / den.0, expected) < 0.05);
        assert!(rel(num.1 / den.1, expected) < 0.05);
    }
}

#[test]
fn label_noise_sets_generalization_floor() {
    let mut c = config(128, 0.5, 0.01);
    c.time_grid = log_grid(10.0, 2e4, 20).unwrap();
    let clean = run_iterative(&c).unwrap();
    c.sigma_delta = 0.1;
    let noisy = run_iterative(&c).unwrap();
    let last = clean.len() - 1;
    // Floor σ²·λ/(1−λ) for the least-squares fit of noisy labels.
    let floor = 0.01 * 0.5 / 0.5;
    assert!(noisy.l_gen[last] - clean.l_gen[last] > 0.3 * floor);
    assert!(noisy.a_gen.iter().all(|&a| a < 0.95));
    assert!(clean.a_gen[last] >= 0.95);
}

#[test]
fn seed_determinism() {
    let mut c = config(50, 0.7, 0.01);
    c.time_grid = log_grid(1.0, 500.0, 10).unwrap();
    c.sigma_delta = 0.05;
    let a = run_iterative(&c).unwrap();
    let b = run_iterative(&c).unwrap();
    assert_eq!(a, b);
    c.seed = 1;
    assert_ne!(a.l_tr, run_iterative(&c).unwrap().l_tr);
}

#[test]
fn two_layer_kernel_trace_at_init() {
    let mut sum_h = 0.0;
    let mut sum_d0 = 0.0;
    for seed in 0..4 {
        let mut c = config(200, 0.5, 0.01);
        c.arch = Arch::TwoLayerLinear;
        c.d_h = 100;
        c.d_out = 2;
        c.seed = seed;
        c.time_grid = vec![0.0];
        let t = run_iterative(&c).unwrap();
        let h0 = t.h.as_ref().unwrap()[0];
        assert!((h0 - 0.5).abs() < 0.05);
        sum_h += h0;
        sum_d0 += t.d0_norm_sq;
    }
    assert!((sum_h / 4.0 - 0.5).abs() < 0.02);
    // E‖S0S1 − T0T1‖² = 1/(2 d_h).
    assert!(rel(sum_d0 / 4.0, 1.0 / 200.0) < 0.1);
}

#[test]
fn step_size_guard_and_unsupported_paths() {
    let mut c = config(50, 0.5, 0.5);
    c.time_grid = vec![0.0, 10.0];
    assert!(matches!(run_iterative(&c), Err(Error::Instability { .. })));
    let gram = training_gram(&c).unwrap();
    c.eta0 = 0.01;
    c.arch = Arch::TwoLayerLinear;
    c.d_h = 10;
    assert!(matches!(run_spectral(&c, &gram), Err(Error::Unsupported(_))));
    c.arch = Arch::OneLayer;
    c.sigma_delta = 0.1;
    assert!(matches!(run_spectral(&c, &gram), Err(Error::Unsupported(_))));
}
