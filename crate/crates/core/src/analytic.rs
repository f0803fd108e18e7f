//! Deterministic loss and accuracy predictions from MP expectations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Tolerance;
use crate::rmt::{mp_continuous, mp_continuous_edge, mp_zero_mass, MpParams};
use crate::special::{erf, erfcx, reg_hyp0f1_scaled, reg_upper_gamma, HYP0F1_MAX_ABS_Z};

/// Relative tolerance of every loss expectation.
pub const LOSS_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Train,
    Gen,
}

fn check_args(lambda: f64, eta0: f64, t: f64) -> Result<MpParams> {
    if !(eta0 > 0.0) || !eta0.is_finite() {
        return Err(Error::invalid(format!("eta0 must be positive, got {eta0}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite and non-negative, got {t}")));
    }
    MpParams::new(lambda)
}

fn tol() -> Tolerance {
    Tolerance { abs: 1e-300, rel: LOSS_REL_TOL }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Natural log of E_MP[q(ν) e^{-4η₀νt}] with q = ν (train) or 1 (gen).
///
/// The exponential is shifted by the lower spectral edge so that the
/// integrand stays O(1) however late t is.
pub fn loss_quadrature_ln(lambda: f64, eta0: f64, t: f64, which: Which) -> Result<f64> {
    let p = check_args(lambda, eta0, t)?;
    let c = 4.0 * eta0 * t;
    let lo = p.lambda_minus();
    let cont = match which {
        Which::Train => mp_continuous_edge(p, |nu, off| nu * (-c * off).exp(), tol())?,
        Which::Gen => mp_continuous_edge(p, |_, off| (-c * off).exp(), tol())?,
    };
    let ln_cont = if cont.value > 0.0 { cont.value.ln() - c * lo } else { f64::NEG_INFINITY };
    let atom = mp_zero_mass(p);
    Ok(match which {
        Which::Gen if atom > 0.0 => log_add(atom.ln(), ln_cont),
        _ => ln_cont,
    })
}

/// Gradient-flow loss averaged over the MP law, including the zero atom.
pub fn loss_quadrature(lambda: f64, eta0: f64, t: f64, which: Which) -> Result<f64> {
    loss_quadrature_ln(lambda, eta0, t, which).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub value: f64,
    /// True when the hypergeometric argument left its range and the value
    /// came from quadrature instead.
    pub fallback: bool,
}

/// L_tr = e^{-4η₀(λ+1)t} ₀F̃₁(2; 16η₀²t²λ), evaluated as
/// e^{-4η₀(1-√λ)²t} · [e^{-2√z} ₀F̃₁(2; z)].
pub fn train_loss_closed(lambda: f64, eta0: f64, t: f64) -> Result<ClosedForm> {
    check_args(lambda, eta0, t)?;
    let z = 16.0 * eta0 * eta0 * t * t * lambda;
    if z > HYP0F1_MAX_ABS_Z {
        let value = loss_quadrature(lambda, eta0, t, Which::Train)?;
        return Ok(ClosedForm { value, fallback: true });
    }
    let a = 1.0 - lambda.sqrt();
    let scaled = reg_hyp0f1_scaled(2.0, z)?;
    Ok(ClosedForm { value: (-4.0 * eta0 * a * a * t).exp() * scaled, fallback: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateTime {
    pub l_tr: f64,
    /// Full late-time generalization loss including the Γ(1/2, ·) term.
    pub l_gen: f64,
    /// Leading form l_tr / (1-√λ)².
    pub l_gen_ratio: f64,
    pub ln_l_tr: f64,
    pub ln_l_gen: f64,
}

/// Late-time expansions for 0 < λ < 1, valid for η₀t > 10√λ.
pub fn late_time_losses(lambda: f64, eta0: f64, t: f64) -> Result<LateTime> {
    check_args(lambda, eta0, t)?;
    if lambda >= 1.0 {
        return Err(Error::Domain {
            function: "late_time_losses",
            detail: format!("derived for lambda < 1, got {lambda}"),
        });
    }
    let tau = eta0 * t;
    if tau <= 10.0 * lambda.sqrt() {
        return Err(Error::OutOfRegime(format!(
            "late-time expansion needs eta0*t > 10*sqrt(lambda) = {:.4}, got {tau}",
            10.0 * lambda.sqrt()
        )));
    }
    let a = 1.0 - lambda.sqrt();
    let l34 = lambda.powf(0.75);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let ln_l_tr = -4.0 * a * a * tau - (16.0 * sqrt_pi * l34).ln() - 1.5 * tau.ln();
    // Γ(1/2, u²) = √π erfc(u); factoring e^{-u²} out leaves √π u erfcx(u).
    let u = 2.0 * a * tau.sqrt();
    let ln_l_gen = -u * u - (2.0 * tau.sqrt() * l34 * sqrt_pi).ln() + (1.0 - sqrt_pi * u * erfcx(u)).ln();
    Ok(LateTime {
        l_tr: ln_l_tr.exp(),
        l_gen: ln_l_gen.exp(),
        l_gen_ratio: (ln_l_tr - 2.0 * a.ln()).exp(),
        ln_l_tr,
        ln_l_gen,
    })
}

/// Fraction of samples whose per-output mean squared error is below ε, for
/// Gaussian errors of variance `loss`.
pub fn accuracy_map(loss: f64, epsilon: f64, d_out: usize) -> f64 {
    if loss <= 0.0 {
        return 1.0;
    }
    if !loss.is_finite() {
        return 0.0;
    }
    let a = if d_out <= 1 {
        erf((epsilon / (2.0 * loss)).sqrt())
    } else {
        let k = d_out as f64;
        1.0 - reg_upper_gamma(0.5 * k, k * epsilon / (2.0 * loss)).unwrap_or(1.0)
    };
    a.clamp(0.0, 1.0)
}

fn check_dout(d_out: usize) -> Result<f64> {
    if d_out == 0 {
        return Err(Error::invalid("d_out must be at least 1"));
    }
    Ok(d_out as f64)
}

/// (l_tr, l_gen) for d_out outputs: (1/d_out)·L(η₀/d_out).
pub fn dout_losses(lambda: f64, eta0: f64, t: f64, d_out: usize) -> Result<(f64, f64)> {
    let k = check_dout(d_out)?;
    Ok((loss_quadrature(lambda, eta0 / k, t, Which::Train)? / k, loss_quadrature(lambda, eta0 / k, t, Which::Gen)? / k))
}

/// Weight-decay losses:
/// ½ E[(e^{-4η₀(ν+γ/2)t} + ((e^{-2η₀(ν+γ/2)t} ν + γ/2)/(ν+γ/2))²) q].
pub fn wd_losses(lambda: f64, eta0: f64, gamma: f64, t: f64, which: Which) -> Result<f64> {
    let p = check_args(lambda, eta0, t)?;
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::invalid(format!("gamma must be non-negative, got {gamma}")));
    }
    if gamma == 0.0 {
        return loss_quadrature(lambda, eta0, t, which);
    }
    let g = 0.5 * gamma;
    let body = |nu: f64| {
        let s = nu + g;
        let e = (-2.0 * eta0 * s * t).exp();
        let r = (e * nu + g) / s;
        0.5 * (e * e + r * r)
    };
    let cont = match which {
        Which::Train => mp_continuous(p, |nu| nu * body(nu), tol())?,
        Which::Gen => mp_continuous(p, body, tol())?,
    };
    let atom = match which {
        Which::Train => 0.0,
        Which::Gen => mp_zero_mass(p) * body(0.0),
    };
    Ok(atom + cont.value)
}

/// Weight decay with d_out outputs. The columns of D evolve independently, so
/// the d_out = 1 result applies per column at learning rate η₀/d_out.
pub fn wd_dout_losses(lambda: f64, eta0: f64, gamma: f64, t: f64, d_out: usize) -> Result<(f64, f64)> {
    let k = check_dout(d_out)?;
    Ok((
        wd_losses(lambda, eta0 / k, gamma, t, Which::Train)? / k,
        wd_losses(lambda, eta0 / k, gamma, t, Which::Gen)? / k,
    ))
}

/// Expected ‖S⁽⁰⁾S⁽¹⁾ − T⁽⁰⁾T⁽¹⁾‖² at initialization, 1/(2 d_h).
pub fn two_layer_d0_norm_sq(d_h: usize) -> f64 {
    1.0 / (2.0 * d_h as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub l_tr: f64,
    pub l_gen: f64,
    pub a_tr: f64,
    pub a_gen: f64,
}

/// Two-layer linear prediction with the kernel trace frozen at h₀ = 1/2:
/// (‖D₀‖²/d_out)·L(η₀/(2 d_out²)).
pub fn two_layer_metrics(
    lambda: f64,
    eta0: f64,
    t: f64,
    d_out: usize,
    d0_norm_sq: f64,
    epsilon: f64,
) -> Result<Metrics> {
    let k = check_dout(d_out)?;
    if !(d0_norm_sq >= 0.0) {
        return Err(Error::invalid(format!("d0_norm_sq must be non-negative, got {d0_norm_sq}")));
    }
    let eff = eta0 / (2.0 * k * k);
    let l_tr = d0_norm_sq / k * loss_quadrature(lambda, eff, t, Which::Train)?;
    let l_gen = d0_norm_sq / k * loss_quadrature(lambda, eff, t, Which::Gen)?;
    Ok(Metrics { l_tr, l_gen, a_tr: accuracy_map(l_tr, epsilon, d_out), a_gen: accuracy_map(l_gen, epsilon, d_out) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    OneLayer,
    TwoLayer { d0_norm_sq: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionParams {
    pub lambda: f64,
    pub eta0: f64,
    pub gamma: f64,
    pub d_out: usize,
    pub epsilon: f64,
    pub model: Model,
}

impl PredictionParams {
    pub fn one_layer(lambda: f64, eta0: f64, epsilon: f64) -> Self {
        Self { lambda, eta0, gamma: 0.0, d_out: 1, epsilon, model: Model::OneLayer }
    }

    /// Learning rate seen by a single column of D.
    pub fn effective_eta0(&self) -> f64 {
        let k = self.d_out as f64;
        match self.model {
            Model::OneLayer => self.eta0 / k,
            Model::TwoLayer { .. } => self.eta0 / (2.0 * k * k),
        }
    }

    pub fn losses(&self, t: f64) -> Result<(f64, f64)> {
        match self.model {
            Model::OneLayer if self.gamma > 0.0 => wd_dout_losses(self.lambda, self.eta0, self.gamma, t, self.d_out),
            Model::OneLayer => dout_losses(self.lambda, self.eta0, t, self.d_out),
            Model::TwoLayer { d0_norm_sq } => {
                if self.gamma > 0.0 {
                    return Err(Error::Unsupported("weight decay in the two-layer prediction".into()));
                }
                let m = two_layer_metrics(self.lambda, self.eta0, t, self.d_out, d0_norm_sq, self.epsilon)?;
                Ok((m.l_tr, m.l_gen))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeTag {
    Early,
    /// η₀t > 10√λ with the effective learning rate: late-time expansions hold.
    LateTimeValid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionCurve {
    pub params: PredictionParams,
    pub times: Vec<f64>,
    pub l_tr: Vec<f64>,
    pub l_gen: Vec<f64>,
    pub a_tr: Vec<f64>,
    pub a_gen: Vec<f64>,
    pub regime_tags: Vec<RegimeTag>,
}

pub fn predict_curve(params: PredictionParams, times: &[f64]) -> Result<PredictionCurve> {
    if params.epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let n = times.len();
    let mut c = PredictionCurve {
        params,
        times: times.to_vec(),
        l_tr: Vec::with_capacity(n),
        l_gen: Vec::with_capacity(n),
        a_tr: Vec::with_capacity(n),
        a_gen: Vec::with_capacity(n),
        regime_tags: Vec::with_capacity(n),
    };
    let eff = params.effective_eta0();
    for &t in times {
        let (tr, gen) = params.losses(t)?;
        c.l_tr.push(tr);
        c.l_gen.push(gen);
        c.a_tr.push(accuracy_map(tr, params.epsilon, params.d_out));
        c.a_gen.push(accuracy_map(gen, params.epsilon, params.d_out));
        c.regime_tags.push(if eff * t > 10.0 * params.lambda.sqrt() {
            RegimeTag::LateTimeValid
        } else {
            RegimeTag::Early
        });
    }
    Ok(c)
}
