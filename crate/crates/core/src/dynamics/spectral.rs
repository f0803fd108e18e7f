use nalgebra::DMatrix;

use super::{one_layer_init, Engine, Trace};
use crate::analytic::accuracy_map;
use crate::config::{Arch, ExperimentConfig};
use crate::error::{Error, Result};
use crate::rmt::EigenBasis;

/// Gradient flow of a one-layer student in the eigenbasis of Σ.
///
/// Per eigen-direction i and output column j, with r = 2η₀(νᵢ + γ/2)/d_out and
/// s = (γ/2)/(νᵢ + γ/2),
///   D̄ᵢⱼ(t) = e^{−r t}(D̄ᵢⱼ(0) + s T̄ᵢⱼ) − s T̄ᵢⱼ.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    pub eigenvalues: Vec<f64>,
    d0: DMatrix<f64>,
    teacher: DMatrix<f64>,
    eta0: f64,
    gamma: f64,
    d_out: usize,
}

impl SpectralModel {
    pub fn new(config: &ExperimentConfig, gram: &DMatrix<f64>) -> Result<Self> {
        config.validate()?;
        if config.arch != Arch::OneLayer {
            return Err(Error::Unsupported(format!(
                "the spectral engine solves one-layer students only, got {}",
                config.arch.name()
            )));
        }
        if config.sigma_delta > 0.0 {
            return Err(Error::Unsupported("label noise in the spectral engine".into()));
        }
        if gram.nrows() != config.d_in {
            return Err(Error::invalid(format!(
                "Gram matrix is {}-dimensional but d_in = {}",
                gram.nrows(),
                config.d_in
            )));
        }
        let basis = EigenBasis::of(gram)?;
        let (t, s) = one_layer_init(config);
        let d0 = basis.project(&(&s - &t));
        let teacher = basis.project(&t);
        Ok(Self {
            eigenvalues: basis.eigenvalues,
            d0,
            teacher,
            eta0: config.eta0,
            gamma: config.gamma,
            d_out: config.d_out,
        })
    }

    pub fn d0_norm_sq(&self) -> f64 {
        self.d0.norm_squared()
    }

    /// (l_tr, l_gen) at gradient-flow time t.
    pub fn losses(&self, t: f64) -> (f64, f64) {
        let k = self.d_out as f64;
        self.losses_with(|shifted| (-2.0 * self.eta0 * shifted * t / k).exp())
    }

    /// (l_tr, l_gen) after `steps` discrete GD steps of size η, using the exact
    /// propagator (1 − 2η(ν + γ/2)/d_out)^steps in place of the exponential.
    pub fn losses_gd(&self, steps: u64, eta: f64) -> (f64, f64) {
        let k = self.d_out as f64;
        self.losses_with(|shifted| (1.0 - 2.0 * eta * shifted / k).powf(steps as f64))
    }

    fn losses_with(&self, propagator: impl Fn(f64) -> f64) -> (f64, f64) {
        let k = self.d_out as f64;
        let g = 0.5 * self.gamma;
        let (mut tr, mut gen) = (0.0, 0.0);
        for (i, &nu) in self.eigenvalues.iter().enumerate() {
            let shifted = nu + g;
            let decay = propagator(shifted);
            let s = if g > 0.0 { g / shifted } else { 0.0 };
            let mut sq = 0.0;
            for j in 0..self.d_out {
                let tb = self.teacher[(i, j)];
                let v = decay * (self.d0[(i, j)] + s * tb) - s * tb;
                sq += v * v;
            }
            tr += nu * sq;
            gen += sq;
        }
        (tr / k, gen / k)
    }
}

/// Exact one-layer trace at the configuration's grid times, no time stepping.
pub fn run_spectral(config: &ExperimentConfig, gram: &DMatrix<f64>) -> Result<Trace> {
    let model = SpectralModel::new(config, gram)?;
    let mut trace = Trace::empty(config, Engine::Spectral, config.time_grid.len());
    trace.d0_norm_sq = model.d0_norm_sq();
    for &t in &config.time_grid {
        let (tr, gen) = model.losses(t);
        trace.times.push(t);
        trace.l_tr.push(tr);
        trace.l_gen.push(gen);
        trace.a_tr.push(accuracy_map(tr, config.epsilon, config.d_out));
        trace.a_gen.push(accuracy_map(gen, config.epsilon, config.d_out));
    }
    Ok(trace)
}
