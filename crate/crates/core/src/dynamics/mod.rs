//! Empirical engines: full-batch gradient descent and the exact spectral
//! solution of gradient flow.

mod one_layer;
mod spectral;
mod two_layer;

pub use one_layer::run_iterative;
pub use spectral::{run_spectral, SpectralModel};
pub use two_layer::run_two_layer;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::rmt::GaussianDataset;
use crate::rng::{self, Stream};

/// Training loss growth that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Iterative,
    Spectral,
}

/// Losses and accuracies sampled on a time grid.
///
/// For linear students `l_gen` is the population loss ‖D‖²/d_out (the
/// generalization covariance is the identity); the finite-sample estimate on
/// the held-out set is kept in `l_gen_sampled`. For tanh students the two
/// coincide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub times: Vec<f64>,
    pub l_tr: Vec<f64>,
    pub l_gen: Vec<f64>,
    pub a_tr: Vec<f64>,
    pub a_gen: Vec<f64>,
    pub l_gen_sampled: Option<Vec<f64>>,
    /// ‖S⁽⁰⁾‖²/2 + ‖S⁽¹⁾‖²/2, two-layer runs only.
    pub h: Option<Vec<f64>>,
    pub engine: Engine,
    pub config: ExperimentConfig,
    /// ‖D₀‖² (for two-layer students, of the end-to-end map S⁽⁰⁾S⁽¹⁾ − T⁽⁰⁾T⁽¹⁾).
    pub d0_norm_sq: f64,
}

impl Trace {
    fn empty(config: &ExperimentConfig, engine: Engine, capacity: usize) -> Self {
        Self {
            times: Vec::with_capacity(capacity),
            l_tr: Vec::with_capacity(capacity),
            l_gen: Vec::with_capacity(capacity),
            a_tr: Vec::with_capacity(capacity),
            a_gen: Vec::with_capacity(capacity),
            l_gen_sampled: None,
            h: None,
            engine,
            config: config.clone(),
            d0_norm_sq: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Fraction of rows whose mean squared component is at most ε.
pub fn accuracy_empirical(errors: &DMatrix<f64>, epsilon: f64, d_out: usize) -> f64 {
    let n = errors.nrows();
    if n == 0 {
        return 1.0;
    }
    let bound = epsilon * d_out as f64;
    let hits = errors.row_iter().filter(|r| r.norm_squared() <= bound).count();
    hits as f64 / n as f64
}

pub(crate) fn gaussian_matrix(rows: usize, cols: usize, std: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| std * rng.sample::<f64, _>(StandardNormal))
}

/// Training inputs of a configuration (the same draw every engine uses).
pub fn training_data(config: &ExperimentConfig) -> Result<GaussianDataset> {
    GaussianDataset::sample(config.n_tr, config.d_in, config.seed, Stream::Data)
}

/// Empirical Gram matrix of the configuration's training inputs.
pub fn training_gram(config: &ExperimentConfig) -> Result<DMatrix<f64>> {
    Ok(training_data(config)?.gram())
}

pub(crate) fn generalization_data(config: &ExperimentConfig) -> Result<GaussianDataset> {
    GaussianDataset::sample(config.n_gen, config.d_in, config.seed, Stream::Generalization)
}

pub(crate) fn label_noise(config: &ExperimentConfig) -> Option<DMatrix<f64>> {
    if config.sigma_delta > 0.0 {
        let mut r = rng::stream(config.seed, Stream::Noise);
        Some(gaussian_matrix(config.n_tr, config.d_out, config.sigma_delta, &mut r))
    } else {
        None
    }
}

/// One-layer teacher T and initial student αS₀, entries N(0, 1/(2 d_in d_out)).
pub fn one_layer_init(config: &ExperimentConfig) -> (DMatrix<f64>, DMatrix<f64>) {
    let std = (1.0 / (2.0 * (config.d_in * config.d_out) as f64)).sqrt();
    let t = gaussian_matrix(config.d_in, config.d_out, std, &mut rng::stream(config.seed, Stream::Teacher));
    let s =
        gaussian_matrix(config.d_in, config.d_out, std, &mut rng::stream(config.seed, Stream::Student)) * config.alpha;
    (t, s)
}

/// Grid times mapped to whole GD steps of length dt; grid points landing on
/// the same step are merged.
pub(crate) fn step_schedule(grid: &[f64], dt: f64) -> (Vec<u64>, Vec<f64>) {
    let mut steps: Vec<u64> = Vec::with_capacity(grid.len());
    for &t in grid {
        let k = (t / dt).round() as u64;
        if steps.last() != Some(&k) {
            steps.push(k);
        }
    }
    let times = steps.iter().map(|&k| k as f64 * dt).collect();
    (steps, times)
}

/// Largest eigenvalue estimate by power iteration, used only for the step-size guard.
pub(crate) fn power_nu_max(gram: &DMatrix<f64>) -> f64 {
    let n = gram.nrows();
    let mut v = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut w = nalgebra::DVector::zeros(n);
    let mut est = 0.0;
    for _ in 0..60 {
        w.gemv(1.0, gram, &v, 0.0);
        est = w.norm();
        if est == 0.0 {
            return 0.0;
        }
        v.copy_from(&w);
        v /= est;
    }
    est
}

pub(crate) fn diverged(time: f64, l_tr: f64, initial: f64, bound: String) -> Error {
    Error::Instability {
        time,
        bound: format!("{bound}; training loss {l_tr:e} exceeded {DIVERGENCE_FACTOR:e} x initial {initial:e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_empirical_rules() {
        let z = DMatrix::<f64>::zeros(10, 3);
        assert_eq!(accuracy_empirical(&z, 1e-3, 3), 1.0);
        let e = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.04, 0.0, 0.05, 0.05, 1.0, 0.0]);
        // Row mean squares: 0, 8e-4, 2.5e-3, 0.5.
        assert_eq!(accuracy_empirical(&e, 1e-3, 2), 0.5);
    }

    #[test]
    fn schedule_merges_coincident_steps() {
        let (s, t) = step_schedule(&[0.0, 0.4, 1.0, 1.2, 5.0], 1.0);
        assert_eq!(s, vec![0, 1, 5]);
        assert_eq!(t, vec![0.0, 1.0, 5.0]);
    }
}
