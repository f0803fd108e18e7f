//! Command-line surface and the `key = value` config file.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use grokklab_core::config::{log_grid, Arch, ExperimentConfig};
use grokklab_core::grok::default_time_grid;

use crate::UsageError;

#[derive(Debug, Parser)]
#[command(name = "grokklab", version, about = "Grokking dynamics in linear teacher-student networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a student and write its loss/accuracy trace.
    Simulate(SimulateArgs),
    /// Evaluate the random-matrix prediction on a time grid.
    Predict(RunArgs),
    /// Grokking time as JSON.
    GrokTime(GrokArgs),
    /// Sweep two parameters and write Δt per cell.
    PhaseDiagram(PhaseArgs),
    /// Write every CSV behind one of the five figures.
    Figure(FigureArgs),
    /// Run the acceptance criteria and print one PASS/FAIL line each.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Iterative,
    Spectral,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` file; flags on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d_in: Option<usize>,
    #[arg(long)]
    pub n_tr: Option<usize>,
    /// Sets n_tr = round(d_in / lambda).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub d_out: Option<usize>,
    #[arg(long)]
    pub n_gen: Option<usize>,
    #[arg(long)]
    pub eta0: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma_delta: Option<f64>,
    /// one_layer, two_layer_linear or two_layer_tanh.
    #[arg(long)]
    pub arch: Option<String>,
    #[arg(long)]
    pub d_h: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// GD step length in units of t (η = η₀·dt).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub time_min: Option<f64>,
    #[arg(long)]
    pub time_max: Option<f64>,
    #[arg(long)]
    pub time_points: Option<usize>,
    /// Evaluate at this single time instead of a grid.
    #[arg(long)]
    pub time: Option<f64>,
    /// Prepend t = 0 to the grid.
    #[arg(long)]
    pub with_zero: bool,
    /// Output file; predictions go to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value = "iterative")]
    pub engine: EngineArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GrokMethod {
    ClosedLeading,
    ClosedCorrected,
    ClosedWd,
    Quadrature,
    Empirical,
}

#[derive(Debug, Clone, Args)]
pub struct GrokArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub method: GrokMethod,
    /// Seeds averaged by the empirical method.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// lambda, d_out or gamma.
    #[arg(long)]
    pub axis1: String,
    #[arg(long)]
    pub axis2: String,
    /// Comma-separated values; a default range per axis otherwise.
    #[arg(long, value_delimiter = ',')]
    pub values1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub values2: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "analytic")]
    pub method: SweepArg,
    #[arg(long, default_value_t = 3)]
    pub seeds: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Figure number, 1 to 5.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
    pub id: u8,
    /// Input dimension of the empirical runs.
    #[arg(long, default_value_t = 1000)]
    pub scale: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Engine for one-layer traces; two-layer runs always iterate.
    #[arg(long, value_enum, default_value = "spectral")]
    pub engine: EngineArg,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Run only these criteria (comma-separated numbers).
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
}

pub struct Setup {
    pub config: ExperimentConfig,
    pub lambda: f64,
}

const CONFIG_KEYS: &[&str] = &[
    "d_in",
    "n_tr",
    "lambda",
    "d_out",
    "n_gen",
    "eta0",
    "gamma",
    "epsilon",
    "alpha",
    "sigma_delta",
    "arch",
    "d_h",
    "seed",
    "dt",
    "time_min",
    "time_max",
    "time_points",
    "time",
];

pub fn read_config_file(path: &Path) -> Result<HashMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| UsageError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse_config(text: &str) -> Result<HashMap<String, String>, UsageError> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| UsageError(format!("line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(UsageError(format!("line {}: unknown key `{}`", i + 1, k.trim())));
        }
        map.insert(key, v.trim().to_owned());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, UsageError> {
    v.parse().map_err(|_| UsageError(format!("invalid value `{v}` for `{key}`")))
}

macro_rules! fill_from {
    ($args:ident, $map:ident; $($field:ident),*) => {
        $(
            if $args.$field.is_none() {
                if let Some(v) = $map.get(stringify!($field)) {
                    $args.$field = Some(parse_value(stringify!($field), v)?);
                }
            }
        )*
    };
}

impl RunArgs {
    /// Command-line values with gaps filled from `--config`.
    pub fn merged(&self) -> Result<RunArgs, UsageError> {
        let mut a = self.clone();
        if let Some(path) = &self.config {
            let map = read_config_file(path)?;
            fill_from!(a, map; d_in, n_tr, lambda, d_out, n_gen, eta0, gamma, epsilon, alpha, sigma_delta, arch,
                d_h, seed, dt, time_min, time_max, time_points, time);
        }
        Ok(a)
    }

    /// Experiment configuration with the grid filled in. Missing sizes default
    /// to d_in = 1000 and λ = 1/2.
    pub fn build(&self) -> Result<ExperimentConfig, UsageError> {
        self.setup().map(|s| s.config)
    }

    /// Like `build`, also returning λ exactly as requested (n_tr is rounded).
    pub fn setup(&self) -> Result<Setup, UsageError> {
        let a = self.merged()?;
        let d_in = a.d_in.unwrap_or(1000);
        let n_tr = match (a.n_tr, a.lambda) {
            (Some(_), Some(_)) => return Err(UsageError("give either --n-tr or --lambda, not both".into())),
            (Some(n), None) => n,
            (None, Some(l)) if l > 0.0 => ((d_in as f64 / l).round() as usize).max(1),
            (None, Some(l)) => return Err(UsageError(format!("lambda must be positive, got {l}"))),
            (None, None) => 2 * d_in,
        };
        let mut c = ExperimentConfig::new(d_in, n_tr);
        if let Some(v) = a.d_out {
            c.d_out = v;
        }
        c.n_gen = a.n_gen.unwrap_or(c.n_gen);
        c.eta0 = a.eta0.unwrap_or(c.eta0);
        c.gamma = a.gamma.unwrap_or(c.gamma);
        c.epsilon = a.epsilon.unwrap_or(c.epsilon);
        c.alpha = a.alpha.unwrap_or(c.alpha);
        c.sigma_delta = a.sigma_delta.unwrap_or(c.sigma_delta);
        if let Some(s) = &a.arch {
            c.arch = s.parse::<Arch>().map_err(|e| UsageError(e.to_string()))?;
        }
        c.d_h = a.d_h.unwrap_or(if c.arch.is_two_layer() { 200 } else { 0 });
        c.seed = a.seed.unwrap_or(c.seed);
        c.dt = a.dt.unwrap_or(c.dt);
        c.validate().map_err(|e| UsageError(e.to_string()))?;
        c.time_grid = a.grid(&c)?;
        let lambda = a.lambda.unwrap_or(c.lambda());
        Ok(Setup { config: c, lambda })
    }

    fn grid(&self, c: &ExperimentConfig) -> Result<Vec<f64>, UsageError> {
        let mut grid = if let Some(t) = self.time {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(UsageError(format!("time must be non-negative, got {t}")));
            }
            vec![t]
        } else if self.time_min.is_none() && self.time_max.is_none() && self.time_points.is_none() {
            default_time_grid(c).map_err(|e| UsageError(e.to_string()))?
        } else {
            let lo = self.time_min.unwrap_or(1e-2 / c.eta0);
            let hi = match self.time_max {
                Some(v) => v,
                None => *default_time_grid(c).map_err(|e| UsageError(e.to_string()))?.last().unwrap_or(&lo),
            };
            log_grid(lo, hi, self.time_points.unwrap_or(200)).map_err(|e| UsageError(e.to_string()))?
        };
        if self.with_zero && grid.first() != Some(&0.0) {
            grid.insert(0, 0.0);
        }
        Ok(grid)
    }
}
