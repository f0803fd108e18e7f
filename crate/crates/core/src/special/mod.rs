//! Special functions needed by the analytic loss and accuracy formulas.
//!
//! Each routine targets the parameter ranges the predictor actually visits
//! rather than the full real line.

mod erf;
mod gamma;
mod hyp0f1;
mod lambert;

pub use erf::{erf, erfc, erfcx};
pub use gamma::{ln_gamma, reg_upper_gamma, reg_upper_gamma_with_error};
pub use hyp0f1::{reg_hyp0f1, reg_hyp0f1_scaled, reg_hyp0f1_with_error, HYP0F1_MAX_ABS_Z};
pub use lambert::lambert_w0;

use serde::{Deserialize, Serialize};

/// A function value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FnResult {
    pub value: f64,
    pub est_error: f64,
}

impl FnResult {
    pub fn new(value: f64, est_error: f64) -> Self {
        Self { value, est_error: est_error.abs() }
    }
}
