use nalgebra::DMatrix;

use super::{
    accuracy_empirical, diverged, generalization_data, label_noise, one_layer_init, power_nu_max, run_two_layer,
    step_schedule, training_data, Engine, Trace, DIVERGENCE_FACTOR,
};
use crate::config::{Arch, ExperimentConfig};
use crate::error::Result;

/// Full-batch gradient descent with step η = η₀·dt.
///
/// One-layer update on D = S − T:
/// D ← D − (2η/d_out)(Σ D − Xᵀδ/N + (γ/2)(D + T)).
/// Two-layer architectures are forwarded to [`run_two_layer`].
pub fn run_iterative(config: &ExperimentConfig) -> Result<Trace> {
    config.validate()?;
    if config.arch != Arch::OneLayer {
        return run_two_layer(config);
    }
    let data = training_data(config)?;
    let gram = data.gram();
    let nu_max = power_nu_max(&gram);
    config.check_stability(nu_max)?;
    let gen = generalization_data(config)?;
    let noise = label_noise(config);

    let (teacher, student) = one_layer_init(config);
    let mut d = &student - &teacher;
    let k = config.d_out as f64;
    let n = config.n_tr as f64;
    let eta = config.eta0 * config.dt;
    let half_gamma = 0.5 * config.gamma;
    // Xᵀδ/N, the only place label noise enters the dynamics.
    let drive = noise.as_ref().map(|delta| {
        let xt = data.samples.transpose();
        (xt * delta) / n
    });

    let (steps, times) = step_schedule(&config.time_grid, config.dt);
    let mut trace = Trace::empty(config, Engine::Iterative, steps.len());
    trace.d0_norm_sq = d.norm_squared();
    let mut sampled = Vec::with_capacity(steps.len());
    let bound = format!("2*eta*(nu_max + gamma/2)/d_out = {:.4} < 1", config.step_factor(nu_max));

    let mut g = DMatrix::zeros(config.d_in, config.d_out);
    let mut quad0 = None;
    let mut next = 0;
    let last = steps.last().copied().unwrap_or(0);
    let mut step = 0u64;
    loop {
        g.gemm(1.0, &gram, &d, 0.0);
        // tr(Dᵀ Σ D), the noiseless part of the training loss.
        let quad = d.dot(&g);
        let q0 = *quad0.get_or_insert(quad);
        if !quad.is_finite() || quad > DIVERGENCE_FACTOR * q0.max(f64::MIN_POSITIVE) {
            return Err(diverged(step as f64 * config.dt, quad / k, q0 / k, bound));
        }
        if next < steps.len() && steps[next] == step {
            let err_tr = match &noise {
                Some(delta) => &data.samples * &d - delta,
                None => &data.samples * &d,
            };
            let l_tr = match &noise {
                Some(_) => err_tr.norm_squared() / (n * k),
                None => quad / k,
            };
            let err_gen = &gen.samples * &d;
            trace.times.push(times[next]);
            trace.l_tr.push(l_tr);
            trace.l_gen.push(d.norm_squared() / k);
            trace.a_tr.push(accuracy_empirical(&err_tr, config.epsilon, config.d_out));
            trace.a_gen.push(accuracy_empirical(&err_gen, config.epsilon, config.d_out));
            sampled.push(err_gen.norm_squared() / (config.n_gen as f64 * k));
            next += 1;
        }
        if step >= last {
            break;
        }
        if let Some(c) = &drive {
            g -= c;
        }
        if half_gamma > 0.0 {
            g += (&d + &teacher) * half_gamma;
        }
        d -= &g * (2.0 * eta / k);
        step += 1;
    }
    trace.l_gen_sampled = Some(sampled);
    Ok(trace)
}
