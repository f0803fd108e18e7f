use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    OneLayer,
    TwoLayerLinear,
    TwoLayerTanh,
}

impl Arch {
    pub fn is_two_layer(self) -> bool {
        !matches!(self, Arch::OneLayer)
    }

    pub fn name(self) -> &'static str {
        match self {
            Arch::OneLayer => "one_layer",
            Arch::TwoLayerLinear => "two_layer_linear",
            Arch::TwoLayerTanh => "two_layer_tanh",
        }
    }
}

impl std::str::FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "one_layer" => Ok(Arch::OneLayer),
            "two_layer_linear" => Ok(Arch::TwoLayerLinear),
            "two_layer_tanh" => Ok(Arch::TwoLayerTanh),
            other => Err(Error::invalid(format!("unknown architecture `{other}`"))),
        }
    }
}

/// Parameters of one teacher-student run. Times are gradient-flow times; the
/// iterative engine takes steps of η = η₀·dt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d_in: usize,
    pub d_out: usize,
    pub n_tr: usize,
    pub n_gen: usize,
    pub eta0: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub sigma_delta: f64,
    pub arch: Arch,
    pub d_h: usize,
    pub seed: u64,
    pub dt: f64,
    pub time_grid: Vec<f64>,
}

pub fn default_n_gen(d_in: usize) -> usize {
    10_000.max(10 * d_in)
}

impl ExperimentConfig {
    /// One-layer configuration with the base setup's defaults and an empty grid.
    pub fn new(d_in: usize, n_tr: usize) -> Self {
        Self {
            d_in,
            d_out: 1,
            n_tr,
            n_gen: default_n_gen(d_in),
            eta0: 0.01,
            gamma: 0.0,
            epsilon: 1e-3,
            alpha: 1.0,
            sigma_delta: 0.0,
            arch: Arch::OneLayer,
            d_h: 0,
            seed: 0,
            dt: 1.0,
            time_grid: Vec::new(),
        }
    }

    /// Configuration whose N_tr is chosen to hit a target λ = d_in / N_tr.
    pub fn with_lambda(d_in: usize, lambda: f64) -> Self {
        let n_tr = ((d_in as f64 / lambda).round() as usize).max(1);
        Self::new(d_in, n_tr)
    }

    pub fn lambda(&self) -> f64 {
        self.d_in as f64 / self.n_tr as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be non-negative and finite, got {v}")))
            }
        };
        for (name, v) in [("d_in", self.d_in), ("d_out", self.d_out), ("n_tr", self.n_tr), ("n_gen", self.n_gen)] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        positive("eta0", self.eta0)?;
        positive("epsilon", self.epsilon)?;
        positive("alpha", self.alpha)?;
        positive("dt", self.dt)?;
        non_negative("gamma", self.gamma)?;
        non_negative("sigma_delta", self.sigma_delta)?;
        if self.arch.is_two_layer() && self.d_h == 0 {
            return Err(Error::invalid("two-layer architectures need d_h >= 1"));
        }
        if let Some(t) = self.time_grid.first() {
            non_negative("time_grid[0]", *t)?;
        }
        if self.time_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("time grid contains a non-finite value"));
        }
        if self.time_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("time grid must be strictly increasing"));
        }
        Ok(())
    }

    /// Per-step contraction factor 2η(ν_max + γ/2)/d_out; GD is monotone when it is below 1.
    pub fn step_factor(&self, nu_max: f64) -> f64 {
        2.0 * self.eta0 * self.dt * (nu_max + 0.5 * self.gamma) / self.d_out as f64
    }

    pub fn check_stability(&self, nu_max: f64) -> Result<()> {
        let f = self.step_factor(nu_max);
        if f >= 1.0 {
            return Err(Error::Instability {
                time: 0.0,
                bound: format!(
                    "2·eta0·dt·(nu_max + gamma/2)/d_out = {f:.4} >= 1 (eta0={}, dt={}, nu_max={nu_max:.4})",
                    self.eta0, self.dt
                ),
            });
        }
        Ok(())
    }
}

/// `n` log-spaced points from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) || n < 2 {
        return Err(Error::invalid(format!("log grid needs 0 < t_min < t_max and n >= 2, got {t_min}, {t_max}, {n}")));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    g[0] = t_min;
    g[n - 1] = t_max;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let mut c = ExperimentConfig::with_lambda(1000, 0.9);
        assert_eq!(c.n_tr, 1111);
        assert_eq!(c.n_gen, 10_000);
        c.time_grid = vec![0.0, 1.0, 10.0];
        c.validate().unwrap();
        c.time_grid = vec![0.0, 0.0];
        assert!(c.validate().is_err());
        c.time_grid.clear();
        c.arch = Arch::TwoLayerTanh;
        assert!(c.validate().is_err());
        c.d_h = 20;
        c.validate().unwrap();
    }

    #[test]
    fn stability_guard() {
        let mut c = ExperimentConfig::new(10, 10);
        c.check_stability(4.0).unwrap();
        c.dt = 20.0;
        assert!(matches!(c.check_stability(4.0), Err(Error::Instability { .. })));
    }

    #[test]
    fn arch_names_round_trip() {
        for a in [Arch::OneLayer, Arch::TwoLayerLinear, Arch::TwoLayerTanh] {
            assert_eq!(a.name().parse::<Arch>().unwrap(), a);
        }
        assert_eq!("two-layer-tanh".parse::<Arch>().unwrap(), Arch::TwoLayerTanh);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1.0, 1e4, 5).unwrap();
        assert_eq!(g[0], 1.0);
        assert_eq!(g[4], 1e4);
        assert!((g[2] - 100.0).abs() < 1e-9);
    }
}
