use crate::error::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Principal branch W₀ of the Lambert W function, `W e^W = z`, for z ≥ -1/e.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if z.is_nan() || z < -INV_E {
        return Err(Error::Domain { function: "lambert_w0", detail: format!("requires z >= -1/e, got {z}") });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == -INV_E {
        return Ok(-1.0);
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = initial_guess(z);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

fn initial_guess(z: f64) -> f64 {
    if z < -0.3 {
        // Branch-point expansion in p = sqrt(2(ez + 1)).
        let p = (2.0 * (std::f64::consts::E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if z < 3.0 {
        let l = z.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}
