//! Shared fixtures for the benchmarks.

use grokklab_core::config::{log_grid, ExperimentConfig};

/// One-layer run at ratio `lambda` on `points` log-spaced times up to `t_max`.
pub fn fixture(d_in: usize, lambda: f64, t_max: f64, points: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::with_lambda(d_in, lambda);
    c.n_gen = 1000;
    c.time_grid = log_grid(1.0, t_max, points).expect("valid grid");
    c
}
