use nalgebra::DMatrix;

use super::{
    accuracy_empirical, diverged, gaussian_matrix, generalization_data, label_noise, power_nu_max, step_schedule,
    training_data, Engine, Trace, DIVERGENCE_FACTOR,
};
use crate::config::{Arch, ExperimentConfig};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

struct Layers {
    s0: DMatrix<f64>,
    s1: DMatrix<f64>,
    t0: DMatrix<f64>,
    t1: DMatrix<f64>,
}

// S⁽⁰⁾, T⁽⁰⁾ ~ N(0, 1/(2 d_in d_h)); S⁽¹⁾, T⁽¹⁾ ~ N(0, 1/(2 d_out d_h)).
// The init rescale α multiplies the student's output layer, hence its end-to-end map.
fn init(config: &ExperimentConfig) -> Layers {
    let (d_in, d_h, d_out) = (config.d_in, config.d_h, config.d_out);
    let std0 = (1.0 / (2.0 * (d_in * d_h) as f64)).sqrt();
    let std1 = (1.0 / (2.0 * (d_out * d_h) as f64)).sqrt();
    let mut tr = rng::stream(config.seed, Stream::Teacher);
    let t0 = gaussian_matrix(d_in, d_h, std0, &mut tr);
    let t1 = gaussian_matrix(d_h, d_out, std1, &mut tr);
    let mut sr = rng::stream(config.seed, Stream::Student);
    let s0 = gaussian_matrix(d_in, d_h, std0, &mut sr);
    let s1 = gaussian_matrix(d_h, d_out, std1, &mut sr) * config.alpha;
    Layers { s0, s1, t0, t1 }
}

fn kernel_trace(l: &Layers) -> f64 {
    0.5 * (l.s0.norm_squared() + l.s1.norm_squared())
}

/// Gradient descent on both layers of a linear or tanh student,
/// L = (1/(N d_out)) Σ‖S⁽¹⁾ᵀσ(S⁽⁰⁾ᵀx) − y‖² (+ weight decay (γ/(2 d_out))Σ‖S⁽ᵏ⁾‖²).
/// Records the kernel trace h = ‖S⁽⁰⁾‖²/2 + ‖S⁽¹⁾‖²/2 alongside the losses.
pub fn run_two_layer(config: &ExperimentConfig) -> Result<Trace> {
    config.validate()?;
    match config.arch {
        Arch::TwoLayerLinear => run_linear(config),
        Arch::TwoLayerTanh => run_tanh(config),
        Arch::OneLayer => Err(Error::Unsupported("run_two_layer needs a two-layer architecture".into())),
    }
}

fn stability_bound(config: &ExperimentConfig, nu_max: f64) -> Result<String> {
    // With the kernel frozen at h, D evolves as D ← D − (2η h/d_out²) Σ D.
    let k = config.d_out as f64;
    let f = 2.0 * config.eta0 * config.dt * 0.5 * (nu_max + 0.5 * config.gamma) / (k * k);
    let bound = format!("2*eta*h0*(nu_max + gamma/2)/d_out^2 = {f:.4} < 1");
    if f >= 1.0 {
        return Err(Error::Instability { time: 0.0, bound });
    }
    Ok(bound)
}

fn run_linear(config: &ExperimentConfig) -> Result<Trace> {
    let data = training_data(config)?;
    let gram = data.gram();
    let bound = stability_bound(config, power_nu_max(&gram))?;
    let gen = generalization_data(config)?;
    let noise = label_noise(config);
    let mut l = init(config);
    let teacher = &l.t0 * &l.t1;
    let k = config.d_out as f64;
    let n = config.n_tr as f64;
    let eta = config.eta0 * config.dt;
    let drive = noise.as_ref().map(|delta| (data.samples.transpose() * delta) / n);

    let (steps, times) = step_schedule(&config.time_grid, config.dt);
    let mut trace = Trace::empty(config, Engine::Iterative, steps.len());
    let mut sampled = Vec::with_capacity(steps.len());
    let mut hs = Vec::with_capacity(steps.len());
    let last = steps.last().copied().unwrap_or(0);
    let mut next = 0;
    let mut quad0 = None;
    let mut step = 0u64;
    loop {
        let w = &l.s0 * &l.s1 - &teacher;
        if step == 0 {
            trace.d0_norm_sq = w.norm_squared();
        }
        let mut m = &gram * &w;
        let quad = w.dot(&m);
        let q0 = *quad0.get_or_insert(quad);
        if !quad.is_finite() || quad > DIVERGENCE_FACTOR * q0.max(f64::MIN_POSITIVE) {
            return Err(diverged(step as f64 * config.dt, quad / k, q0 / k, bound));
        }
        if next < steps.len() && steps[next] == step {
            let err_tr = match &noise {
                Some(delta) => &data.samples * &w - delta,
                None => &data.samples * &w,
            };
            let err_gen = &gen.samples * &w;
            trace.times.push(times[next]);
            trace.l_tr.push(match &noise {
                Some(_) => err_tr.norm_squared() / (n * k),
                None => quad / k,
            });
            trace.l_gen.push(w.norm_squared() / k);
            trace.a_tr.push(accuracy_empirical(&err_tr, config.epsilon, config.d_out));
            trace.a_gen.push(accuracy_empirical(&err_gen, config.epsilon, config.d_out));
            sampled.push(err_gen.norm_squared() / (config.n_gen as f64 * k));
            hs.push(kernel_trace(&l));
            next += 1;
        }
        if step >= last {
            break;
        }
        if let Some(c) = &drive {
            m -= c;
        }
        // ∇_{S0} = (2/d_out) M S1ᵀ, ∇_{S1} = (2/d_out) S0ᵀ M with M = Σ W − Xᵀδ/N.
        let mut g0 = &m * l.s1.transpose() * (2.0 / k);
        let mut g1 = l.s0.tr_mul(&m) * (2.0 / k);
        if config.gamma > 0.0 {
            g0 += &l.s0 * (config.gamma / k);
            g1 += &l.s1 * (config.gamma / k);
        }
        l.s0 -= g0 * eta;
        l.s1 -= g1 * eta;
        step += 1;
    }
    trace.l_gen_sampled = Some(sampled);
    trace.h = Some(hs);
    Ok(trace)
}

fn tanh_forward(x: &DMatrix<f64>, w0: &DMatrix<f64>) -> DMatrix<f64> {
    (x * w0).map(f64::tanh)
}

fn run_tanh(config: &ExperimentConfig) -> Result<Trace> {
    let data = training_data(config)?;
    let x = &data.samples;
    let xt = x.transpose();
    let gen = generalization_data(config)?;
    let noise = label_noise(config);
    let mut l = init(config);
    let k = config.d_out as f64;
    let n = config.n_tr as f64;
    let eta = config.eta0 * config.dt;
    let mut y = tanh_forward(x, &l.t0) * &l.t1;
    if let Some(delta) = &noise {
        y += delta;
    }
    let y_gen = tanh_forward(&gen.samples, &l.t0) * &l.t1;
    let bound = stability_bound(config, power_nu_max(&data.gram()))?;

    let (steps, times) = step_schedule(&config.time_grid, config.dt);
    let mut trace = Trace::empty(config, Engine::Iterative, steps.len());
    let mut hs = Vec::with_capacity(steps.len());
    let last = steps.last().copied().unwrap_or(0);
    let mut next = 0;
    let mut l0 = None;
    let mut step = 0u64;
    loop {
        let hidden = tanh_forward(x, &l.s0);
        let err = &hidden * &l.s1 - &y;
        let l_tr = err.norm_squared() / (n * k);
        let first = *l0.get_or_insert(l_tr);
        if !l_tr.is_finite() || l_tr > DIVERGENCE_FACTOR * first.max(f64::MIN_POSITIVE) {
            return Err(diverged(step as f64 * config.dt, l_tr, first, bound));
        }
        if step == 0 {
            trace.d0_norm_sq = (&l.s0 * &l.s1 - &l.t0 * &l.t1).norm_squared();
        }
        if next < steps.len() && steps[next] == step {
            let err_gen = tanh_forward(&gen.samples, &l.s0) * &l.s1 - &y_gen;
            trace.times.push(times[next]);
            trace.l_tr.push(l_tr);
            trace.l_gen.push(err_gen.norm_squared() / (config.n_gen as f64 * k));
            trace.a_tr.push(accuracy_empirical(&err, config.epsilon, config.d_out));
            trace.a_gen.push(accuracy_empirical(&err_gen, config.epsilon, config.d_out));
            hs.push(kernel_trace(&l));
            next += 1;
        }
        if step >= last {
            break;
        }
        let scale = 2.0 / (n * k);
        let mut g1 = hidden.tr_mul(&err) * scale;
        let back = (&err * l.s1.transpose()).component_mul(&hidden.map(|a| 1.0 - a * a));
        let mut g0 = &xt * back * scale;
        if config.gamma > 0.0 {
            g0 += &l.s0 * (config.gamma / k);
            g1 += &l.s1 * (config.gamma / k);
        }
        l.s0 -= g0 * eta;
        l.s1 -= g1 * eta;
        step += 1;
    }
    trace.l_gen_sampled = Some(trace.l_gen.clone());
    trace.h = Some(hs);
    Ok(trace)
}
