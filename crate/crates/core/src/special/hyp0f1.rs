use super::{ln_gamma, FnResult};
use crate::error::{Error, Result};

/// Largest |z| accepted by the ₀F̃₁ routines.
pub const HYP0F1_MAX_ABS_Z: f64 = 1e6;

// Negative arguments give an alternating (Bessel J) series whose cancellation
// grows like exp(2 sqrt|z|); past this point the relative error bound is lost.
const NEG_LIMIT: f64 = 25.0;
// Beyond x = 2 sqrt(z) = 60 the Bessel I asymptotic series converges to
// machine precision for the small orders used here.
const ASYMPTOTIC_X: f64 = 60.0;

/// Regularized ₀F̃₁(b; z) = Σ z^k / (k! Γ(b+k)).
pub fn reg_hyp0f1(b: f64, z: f64) -> Result<f64> {
    reg_hyp0f1_with_error(b, z).map(|r| r.value)
}

pub fn reg_hyp0f1_with_error(b: f64, z: f64) -> Result<FnResult> {
    check(b, z)?;
    if z < 0.0 || 2.0 * z.sqrt() <= ASYMPTOTIC_X {
        return Ok(series(b, z));
    }
    let x = 2.0 * z.sqrt();
    let scaled = scaled_large(b, z)?;
    let ln_v = x + scaled.value.ln();
    if ln_v > f64::MAX.ln() {
        return Err(Error::Range {
            function: "reg_hyp0f1",
            detail: format!("result overflows at b={b}, z={z}; use the scaled form"),
        });
    }
    let v = ln_v.exp();
    Ok(FnResult::new(v, v * (scaled.est_error / scaled.value + x * f64::EPSILON)))
}

/// `exp(-2 sqrt(z)) * ₀F̃₁(b; z)` for z ≥ 0, which stays representable for every
/// admissible z.
pub fn reg_hyp0f1_scaled(b: f64, z: f64) -> Result<f64> {
    check(b, z)?;
    if z < 0.0 {
        return Err(Error::Domain {
            function: "reg_hyp0f1_scaled",
            detail: format!("scaled form defined for z >= 0, got {z}"),
        });
    }
    let x = 2.0 * z.sqrt();
    if x <= ASYMPTOTIC_X {
        Ok(series(b, z).value * (-x).exp())
    } else {
        scaled_large(b, z).map(|r| r.value)
    }
}

fn check(b: f64, z: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::invalid(format!("₀F̃₁ needs b > 0, got {b}")));
    }
    if !z.is_finite() || z.abs() > HYP0F1_MAX_ABS_Z {
        return Err(Error::Range {
            function: "reg_hyp0f1",
            detail: format!("|z| = {} exceeds {HYP0F1_MAX_ABS_Z:e}", z.abs()),
        });
    }
    if z < -NEG_LIMIT {
        return Err(Error::Range {
            function: "reg_hyp0f1",
            detail: format!("negative z below -{NEG_LIMIT} loses precision, got {z}"),
        });
    }
    Ok(())
}

fn series(b: f64, z: f64) -> FnResult {
    let mut term = (-ln_gamma(b)).exp();
    let mut sum = term;
    let mut abs_sum = term.abs();
    let k_peak = z.abs().sqrt();
    let mut k = 0.0;
    loop {
        term *= z / ((k + 1.0) * (b + k));
        k += 1.0;
        sum += term;
        abs_sum += term.abs();
        if k > k_peak && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        if k > 10_000.0 {
            break;
        }
    }
    let err = f64::EPSILON * (abs_sum * (2.0 + k.sqrt()) + sum.abs() * ln_gamma(b).abs());
    FnResult::new(sum, err)
}

// z^{(1-b)/2} e^{-x} I_{b-1}(x), x = 2 sqrt(z), from the Hankel expansion
//   e^{-x} I_ν(x) ~ (2πx)^{-1/2} Σ_k (-1)^k a_k(ν) x^{-k}.
fn scaled_large(b: f64, z: f64) -> Result<FnResult> {
    let nu = b - 1.0;
    let x = 2.0 * z.sqrt();
    let mu = 4.0 * nu * nu;
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    let mut converged = false;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() > term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        if x < 700.0 {
            let v = series(b, z);
            let s = (-x).exp();
            return Ok(FnResult::new(v.value * s, v.est_error * s));
        }
        return Err(Error::Range {
            function: "reg_hyp0f1",
            detail: format!("asymptotic expansion does not converge at b={b}, z={z}"),
        });
    }
    let pref = (0.5 * (1.0 - b) * z.ln()).exp() / (2.0 * std::f64::consts::PI * x).sqrt();
    let v = pref * sum;
    Ok(FnResult::new(v, v.abs() * 8.0 * f64::EPSILON * (1.0 + z.ln().abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    // e^{-x} I_n(x) = (1/π) ∫_0^π e^{x(cos θ - 1)} cos(nθ) dθ by the trapezoid
    // rule, which converges geometrically for this periodic integrand.
    fn scaled_bessel_i(n: u32, x: f64) -> f64 {
        let m = 20_000;
        let h = std::f64::consts::PI / m as f64;
        let f = |th: f64| (x * (th.cos() - 1.0)).exp() * (n as f64 * th).cos();
        let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
        for i in 1..m {
            s += f(i as f64 * h);
        }
        s * h / std::f64::consts::PI
    }

    #[test]
    fn origin_and_direct_series() {
        assert_eq!(reg_hyp0f1(2.0, 0.0).unwrap(), 1.0);
        let mut oracle = 0.0;
        let mut fact_k = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact_k *= k as f64;
            }
            oracle += 1.0 / (fact_k * fact_k * (k + 1) as f64);
        }
        let v = reg_hyp0f1(2.0, 1.0).unwrap();
        assert!((v / oracle - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bessel_identity() {
        for &z in &[100.0, 850.0, 899.0, 901.0, 1000.0, 1e4, 2.5e5] {
            let x = 2.0 * f64::sqrt(z);
            let oracle = scaled_bessel_i(1, x) / z.sqrt();
            let v = reg_hyp0f1_scaled(2.0, z).unwrap();
            assert!((v / oracle - 1.0).abs() < 1e-8, "z={z}: {v} vs {oracle}");
        }
        let v = reg_hyp0f1(2.0, 100.0).unwrap();
        let oracle = scaled_bessel_i(1, 20.0) * 20f64.exp() / 10.0;
        assert!((v / oracle - 1.0).abs() < 1e-8);
    }

    #[test]
    fn negative_argument_is_bessel_j() {
        // ₀F̃₁(1; -y) = J_0(2 sqrt(y)); J_0(2) = 0.22389077914123567
        let v = reg_hyp0f1(1.0, -1.0).unwrap();
        assert!((v - 0.223_890_779_141_235_67).abs() < 1e-14);
        assert!(matches!(reg_hyp0f1(2.0, -30.0), Err(Error::Range { .. })));
    }

    #[test]
    fn range_errors() {
        assert!(matches!(reg_hyp0f1(2.0, 2e6), Err(Error::Range { .. })));
        assert!(matches!(reg_hyp0f1(2.0, 5e5), Err(Error::Range { .. })));
        assert!(reg_hyp0f1_scaled(2.0, 5e5).unwrap() > 0.0);
        assert!(matches!(reg_hyp0f1(0.0, 1.0), Err(Error::InvalidParameter(_))));
    }
}
