//! Grokking-time extraction, closed-form laws and phase-diagram sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{accuracy_map, PredictionParams};
use crate::config::{log_grid, Arch, ExperimentConfig};
use crate::dynamics::run_iterative;
use crate::error::{Error, Result};
use crate::special::lambert_w0;

/// Accuracy level defining t*, Erf(√2) rounded as in the definition A(t*) = 0.95.
pub const DEFAULT_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub time: Option<f64>,
    /// The curve already satisfied the threshold at the first grid time.
    pub boundary: bool,
    /// The curve leaves the threshold region again after the first crossing.
    pub multiple: bool,
}

/// First time the curve crosses `threshold`, interpolating linearly in
/// (log t, log value) between the bracketing grid points.
pub fn crossing_time(times: &[f64], values: &[f64], threshold: f64, direction: Direction) -> Result<Crossing> {
    if times.len() != values.len() {
        return Err(Error::invalid("times and values differ in length"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("crossing detection needs strictly increasing times"));
    }
    let hit = |v: f64| match direction {
        Direction::Up => v >= threshold,
        Direction::Down => v <= threshold,
    };
    let Some(k) = values.iter().position(|&v| hit(v)) else {
        return Ok(Crossing { time: None, boundary: false, multiple: false });
    };
    let multiple = values[k..].iter().any(|&v| !hit(v));
    if k == 0 {
        return Ok(Crossing { time: Some(times[0]), boundary: true, multiple });
    }
    let t = interpolate(times[k - 1], times[k], values[k - 1], values[k], threshold);
    Ok(Crossing { time: Some(t), boundary: false, multiple })
}

fn interpolate(t0: f64, t1: f64, v0: f64, v1: f64, thr: f64) -> f64 {
    let logv = v0 > 0.0 && v1 > 0.0 && thr > 0.0;
    let (y0, y1, y) = if logv { (v0.ln(), v1.ln(), thr.ln()) } else { (v0, v1, thr) };
    if y1 == y0 {
        return t1;
    }
    let f = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
    if t0 > 0.0 {
        (t0.ln() + f * (t1.ln() - t0.ln())).exp()
    } else {
        t0 + f * (t1 - t0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Empirical,
    AnalyticQuadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoGrokReason {
    GenNeverConverges,
    BothInstant,
    OutOfHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrokReport {
    pub t_star_tr: Option<f64>,
    pub t_star_gen: Option<f64>,
    pub delta_t: Option<f64>,
    pub threshold: f64,
    pub method: Method,
    pub no_grok_reason: Option<NoGrokReason>,
    #[serde(default)]
    pub multi_crossing: bool,
}

impl GrokReport {
    /// Report from accuracy curves. `a_gen_limit` is the t → ∞ generalization
    /// accuracy when known; it separates "never converges" from "not yet".
    pub fn from_curves(
        times: &[f64],
        a_tr: &[f64],
        a_gen: &[f64],
        threshold: f64,
        method: Method,
        a_gen_limit: Option<f64>,
    ) -> Result<Self> {
        let tr = crossing_time(times, a_tr, threshold, Direction::Up)?;
        let gen = crossing_time(times, a_gen, threshold, Direction::Up)?;
        Ok(Self::assemble(tr, gen, threshold, method, a_gen_limit))
    }

    fn assemble(tr: Crossing, gen: Crossing, threshold: f64, method: Method, a_gen_limit: Option<f64>) -> Self {
        let no_grok_reason = match (tr.time, gen.time) {
            (_, None) => Some(match a_gen_limit {
                Some(a) if a < threshold => NoGrokReason::GenNeverConverges,
                _ => NoGrokReason::OutOfHorizon,
            }),
            (Some(_), Some(_)) if tr.boundary && gen.boundary => Some(NoGrokReason::BothInstant),
            _ => None,
        };
        let delta_t = match (tr.time, gen.time) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        };
        Self {
            t_star_tr: tr.time,
            t_star_gen: gen.time,
            delta_t,
            threshold,
            method,
            no_grok_reason,
            multi_crossing: tr.multiple || gen.multiple,
        }
    }

    pub fn groks(&self) -> bool {
        self.delta_t.is_some() && self.no_grok_reason.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Leading,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedGrok {
    pub delta_t: f64,
    /// Lambert-W late-time solutions of L(t*) = ε/4.
    pub t_star_tr: f64,
    pub t_star_gen: f64,
}

fn underparameterized(function: &'static str, lambda: f64, eta0: f64) -> Result<(f64, f64)> {
    if !(eta0 > 0.0) {
        return Err(Error::invalid(format!("eta0 must be positive, got {eta0}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain { function, detail: format!("derived for 0 < lambda < 1, got {lambda}") });
    }
    let s = lambda.sqrt();
    Ok((1.0 - s, s))
}

/// log(1/(1−√λ)) / (2η₀(1−√λ)²).
pub fn grok_time_leading(lambda: f64, eta0: f64) -> Result<f64> {
    let (a, _) = underparameterized("grok_time_closed", lambda, eta0)?;
    Ok((1.0 / a).ln() / (2.0 * eta0 * a * a))
}

/// Lambert-W expressions for t*_tr and t*_gen at loss threshold ε/4.
pub fn grok_star_times(lambda: f64, eta0: f64, epsilon: f64) -> Result<(f64, f64)> {
    let (a, s) = underparameterized("grok_time_closed", lambda, eta0)?;
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let pref = 3.0 / (8.0 * eta0 * a * a);
    let c = 2f64.powf(5.0 / 3.0) / (3.0 * std::f64::consts::PI.cbrt() * s * epsilon.powf(2.0 / 3.0));
    let t_tr = pref * lambert_w0(c * a * a)?;
    let t_gen = pref * lambert_w0(c * a.powf(2.0 / 3.0))?;
    Ok((t_tr, t_gen))
}

pub fn grok_time_closed(lambda: f64, eta0: f64, epsilon: f64, order: Order) -> Result<ClosedGrok> {
    let leading = grok_time_leading(lambda, eta0)?;
    let (t_star_tr, t_star_gen) = grok_star_times(lambda, eta0, epsilon)?;
    let delta_t = match order {
        Order::Leading => leading,
        Order::Corrected => {
            let (a, s) = underparameterized("grok_time_closed", lambda, eta0)?;
            let den = (2.0 * (2.0 - 2.0 * s).powf(2.0 / 3.0)
                / (3.0 * std::f64::consts::PI.cbrt() * s * epsilon.powf(2.0 / 3.0)))
            .ln();
            let arg = 1.0 + (4.0 / 3.0) * a.ln() / den;
            if !(den > 0.0 && arg > 0.0) {
                return Err(Error::OutOfRegime(format!(
                    "corrected grokking time needs a small-epsilon expansion; its log argument is {arg:.4} at lambda={lambda}, epsilon={epsilon}"
                )));
            }
            leading + 3.0 / (8.0 * eta0 * a * a) * arg.ln()
        }
    };
    Ok(ClosedGrok { delta_t, t_star_tr, t_star_gen })
}

/// log(1+√λ) / (2η₀(1−√λ)²): small-γ weight decay with ε below the loss floor.
pub fn grok_time_wd(lambda: f64, eta0: f64) -> Result<f64> {
    let (a, s) = underparameterized("grok_time_wd", lambda, eta0)?;
    Ok((1.0 + s).ln() / (2.0 * eta0 * a * a))
}

/// No-grok cutoff: 10³ × the leading grokking time at λ = 1/2.
pub fn no_grok_horizon(eta0: f64) -> Result<f64> {
    Ok(1e3 * grok_time_leading(0.5, eta0)?)
}

/// 200 log-spaced times from 10⁻²/η₀ to 4× an analytic estimate of when
/// generalization settles.
pub fn default_time_grid(config: &ExperimentConfig) -> Result<Vec<f64>> {
    log_grid(1e-2 / config.eta0, settle_time(config)?, 200)
}

fn settle_time(c: &ExperimentConfig) -> Result<f64> {
    let k = c.d_out as f64;
    let eff = if c.arch.is_two_layer() { c.eta0 / (2.0 * k * k) } else { c.eta0 / k };
    let lambda = c.lambda();
    let mut t: f64 = 0.0;
    if lambda < 1.0 {
        let (_, t_gen) = grok_star_times(lambda, eff, c.epsilon)?;
        t = t.max(4.0 * t_gen);
    } else {
        let edge = (1.0 - lambda.sqrt()).powi(2);
        let relax = if edge > 0.0 { 20.0 / (4.0 * eff * edge) } else { no_grok_horizon(c.eta0)? };
        t = t.max(relax);
    }
    if c.gamma > 0.0 {
        t = t.max(5.0 / (eff * c.gamma));
    }
    Ok(t.min(no_grok_horizon(c.eta0)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Lambda,
    DOut,
    Gamma,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Lambda => "lambda",
            AxisName::DOut => "d_out",
            AxisName::Gamma => "gamma",
        }
    }
}

impl std::str::FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "lambda" => Ok(AxisName::Lambda),
            "d_out" | "dout" => Ok(AxisName::DOut),
            "gamma" => Ok(AxisName::Gamma),
            other => Err(Error::invalid(format!("unknown sweep axis `{other}` (expected lambda, d_out or gamma)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: AxisName, values: Vec<f64>) -> Self {
        Self { name, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepMethod {
    #[default]
    Analytic,
    Empirical {
        seeds: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub axis1: f64,
    pub axis2: f64,
    pub report: GrokReport,
    /// Standard deviation of Δt across seeds (empirical sweeps).
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    /// Row-major: all axis2 values for the first axis1 value, then the next.
    pub cells: Vec<PhaseCell>,
}

impl PhaseGrid {
    pub fn cell(&self, i: usize, j: usize) -> &PhaseCell {
        &self.cells[i * self.axis2.values.len() + j]
    }
}

fn apply_axis(c: &mut ExperimentConfig, name: AxisName, v: f64) -> Result<()> {
    match name {
        AxisName::Lambda => {
            if !(v > 0.0) {
                return Err(Error::invalid(format!("lambda must be positive, got {v}")));
            }
            c.n_tr = ((c.d_in as f64 / v).round() as usize).max(1);
        }
        AxisName::DOut => {
            if !(v >= 1.0) || v.fract() != 0.0 {
                return Err(Error::invalid(format!("d_out must be a positive integer, got {v}")));
            }
            c.d_out = v as usize;
        }
        AxisName::Gamma => {
            if !(v >= 0.0) {
                return Err(Error::invalid(format!("gamma must be non-negative, got {v}")));
            }
            c.gamma = v;
        }
    }
    Ok(())
}

fn cell_lambda(base: &ExperimentConfig, axis1: &Axis, v1: f64, axis2: &Axis, v2: f64) -> f64 {
    if axis1.name == AxisName::Lambda {
        v1
    } else if axis2.name == AxisName::Lambda {
        v2
    } else {
        base.lambda()
    }
}

/// Sweep two parameters and extract Δt_grok per cell at accuracy 0.95.
pub fn phase_sweep(base: &ExperimentConfig, axis1: &Axis, axis2: &Axis, method: SweepMethod) -> Result<PhaseGrid> {
    if axis1.name == axis2.name {
        return Err(Error::invalid("phase sweep axes must differ"));
    }
    let mut jobs = Vec::with_capacity(axis1.values.len() * axis2.values.len());
    for &v1 in &axis1.values {
        for &v2 in &axis2.values {
            let mut c = base.clone();
            apply_axis(&mut c, axis1.name, v1)?;
            apply_axis(&mut c, axis2.name, v2)?;
            jobs.push((v1, v2, cell_lambda(base, axis1, v1, axis2, v2), c));
        }
    }
    let cells: Result<Vec<PhaseCell>> = jobs
        .into_par_iter()
        .map(|(v1, v2, lambda, c)| {
            let (report, spread) = match method {
                SweepMethod::Analytic => (analytic_report(&prediction_params(&c, lambda)?, DEFAULT_THRESHOLD)?, None),
                SweepMethod::Empirical { seeds } => empirical_report(&c, seeds)?,
            };
            Ok(PhaseCell { axis1: v1, axis2: v2, report, spread })
        })
        .collect();
    Ok(PhaseGrid { axis1: axis1.clone(), axis2: axis2.clone(), cells: cells? })
}

fn prediction_params(c: &ExperimentConfig, lambda: f64) -> Result<PredictionParams> {
    if c.arch != Arch::OneLayer {
        return Err(Error::Unsupported("analytic phase sweeps cover one-layer students".into()));
    }
    Ok(PredictionParams {
        lambda,
        gamma: c.gamma,
        d_out: c.d_out,
        ..PredictionParams::one_layer(lambda, c.eta0, c.epsilon)
    })
}

const SWEEP_POINTS: usize = 160;

/// Grokking report from the analytic prediction, with crossings bracketed on
/// a log grid up to the no-grok horizon and refined by bisection in log t.
pub fn analytic_report(params: &PredictionParams, threshold: f64) -> Result<GrokReport> {
    let horizon = no_grok_horizon(params.eta0)?;
    let mut times = vec![0.0];
    times.extend(log_grid(horizon * 1e-6, horizon, SWEEP_POINTS)?);
    let acc = |t: f64| -> Result<(f64, f64)> {
        let (tr, gen) = params.losses(t)?;
        Ok((accuracy_map(tr, params.epsilon, params.d_out), accuracy_map(gen, params.epsilon, params.d_out)))
    };
    let mut a_tr = Vec::with_capacity(times.len());
    let mut a_gen = Vec::with_capacity(times.len());
    for &t in &times {
        let (x, y) = acc(t)?;
        a_tr.push(x);
        a_gen.push(y);
    }
    let refine = |values: &[f64], pick: usize| -> Result<Crossing> {
        let mut c = crossing_time(&times, values, threshold, Direction::Up)?;
        if let (Some(_), false) = (c.time, c.boundary) {
            let k = values.iter().position(|&v| v >= threshold).expect("crossing exists");
            let (mut lo, mut hi) = (times[k - 1], times[k]);
            for _ in 0..60 {
                let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
                let a = acc(mid)?;
                let v = if pick == 0 { a.0 } else { a.1 };
                if v >= threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-10 * hi {
                    break;
                }
            }
            c.time = Some(hi);
        }
        Ok(c)
    };
    let tr = refine(&a_tr, 0)?;
    let gen = refine(&a_gen, 1)?;
    let limit = acc(horizon * 1e6)?.1;
    Ok(GrokReport::assemble(tr, gen, threshold, Method::AnalyticQuadrature, Some(limit)))
}

/// Seed-averaged empirical report; the spread is the standard deviation of Δt.
pub fn empirical_report(config: &ExperimentConfig, seeds: usize) -> Result<(GrokReport, Option<f64>)> {
    if seeds == 0 {
        return Err(Error::invalid("empirical sweeps need at least one seed"));
    }
    let mut c = config.clone();
    if c.time_grid.is_empty() {
        c.time_grid = default_time_grid(&c)?;
    }
    let mut reports = Vec::with_capacity(seeds);
    for s in 0..seeds {
        c.seed = config.seed + s as u64;
        let t = run_iterative(&c)?;
        reports.push(GrokReport::from_curves(&t.times, &t.a_tr, &t.a_gen, DEFAULT_THRESHOLD, Method::Empirical, None)?);
    }
    Ok(average_reports(&reports))
}

/// Mean of the per-seed reports. A cell groks only if every seed does.
pub fn average_reports(reports: &[GrokReport]) -> (GrokReport, Option<f64>) {
    let mean = |f: &dyn Fn(&GrokReport) -> Option<f64>| -> Option<f64> {
        let v: Option<Vec<f64>> = reports.iter().map(f).collect();
        v.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    let first = &reports[0];
    let reason = reports.iter().find_map(|r| r.no_grok_reason);
    let deltas: Option<Vec<f64>> = reports.iter().map(|r| r.delta_t).collect();
    let spread = deltas.as_ref().map(|d| {
        let m = d.iter().sum::<f64>() / d.len() as f64;
        (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / d.len() as f64).sqrt()
    });
    let report = GrokReport {
        t_star_tr: mean(&|r| r.t_star_tr),
        t_star_gen: mean(&|r| r.t_star_gen),
        delta_t: mean(&|r| r.delta_t),
        threshold: first.threshold,
        method: first.method,
        no_grok_reason: reason,
        multi_crossing: reports.iter().any(|r| r.multi_crossing),
    };
    (report, spread)
}

/// Crossing of a fixed fraction of the late-time accuracy, used when ε lies
/// below a loss floor and the absolute 0.95 level is never reached.
pub fn saturation_report(
    times: &[f64],
    a_tr: &[f64],
    a_gen: &[f64],
    a_tr_limit: f64,
    a_gen_limit: f64,
    fraction: f64,
    method: Method,
) -> Result<GrokReport> {
    let tr = crossing_time(times, a_tr, fraction * a_tr_limit, Direction::Up)?;
    let gen = crossing_time(times, a_gen, fraction * a_gen_limit, Direction::Up)?;
    Ok(GrokReport::assemble(tr, gen, fraction, method, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_on_exponential() {
        let times = log_grid(0.01, 50.0, 50).unwrap();
        let v: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        let c = crossing_time(&times, &v, (-5.0f64).exp(), Direction::Down).unwrap();
        assert!((c.time.unwrap() - 5.0).abs() < 1e-3 * 5.0 * 5.0, "{:?}", c.time);
        assert!(!c.boundary && !c.multiple);
    }

    #[test]
    fn crossing_flags() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let c = crossing_time(&t, &[0.99, 0.99, 0.99, 0.99], 0.95, Direction::Up).unwrap();
        assert_eq!(c.time, Some(1.0));
        assert!(c.boundary);
        let c = crossing_time(&t, &[0.1, 0.96, 0.5, 0.97], 0.95, Direction::Up).unwrap();
        assert!(c.multiple);
        assert!(c.time.unwrap() > 1.0 && c.time.unwrap() < 2.0);
        let c = crossing_time(&t, &[0.1, 0.2, 0.3, 0.4], 0.95, Direction::Up).unwrap();
        assert_eq!(c.time, None);
        assert!(crossing_time(&[1.0, 1.0], &[0.0, 1.0], 0.5, Direction::Up).is_err());
    }

    #[test]
    fn closed_form_values() {
        let v = grok_time_leading(0.25, 0.01).unwrap();
        assert!((v - 2f64.ln() / (2.0 * 0.01 * 0.25)).abs() < 1e-9);
        assert!((v - 138.629).abs() < 1e-3);
        assert!(grok_time_leading(1e-12, 0.01).unwrap() < 1e-3);
        assert!((grok_time_wd(0.25, 0.01).unwrap() - 1.5f64.ln() / 0.005).abs() < 1e-9);
        assert!(grok_time_wd(0.5, 0.01).unwrap() < grok_time_leading(0.5, 0.01).unwrap());
        assert!(matches!(grok_time_leading(1.0, 0.01), Err(Error::Domain { .. })));
        assert!(matches!(grok_time_wd(1.5, 0.01), Err(Error::Domain { .. })));
    }

    #[test]
    fn lambert_arguments_match_polynomial_form() {
        // The appendix writes the cube roots as polynomials in √λ.
        let (lambda, eta0, eps) = (0.3f64, 0.01, 1e-3f64);
        let s = lambda.sqrt();
        let a = 1.0 - s;
        let pi = std::f64::consts::PI;
        let p_tr = (lambda.powf(1.5) / pi + 1.0 / (pi * lambda.powf(1.5)) - 6.0 * lambda / pi + 15.0 * s / pi
            - 6.0 / (pi * lambda)
            + 15.0 / (pi * s)
            - 20.0 / pi)
            .cbrt();
        let p_gen = (1.0 / (pi * lambda.powf(1.5)) + 1.0 / (pi * s) - 2.0 / (pi * lambda)).cbrt();
        let z_tr = 2.0 * 2f64.powf(2.0 / 3.0) * p_tr / (3.0 * eps.powf(2.0 / 3.0));
        let z_gen = 2f64.powf(5.0 / 3.0) * p_gen / (3.0 * eps.powf(2.0 / 3.0));
        let pref = 3.0 / (8.0 * eta0 * a * a);
        let (t_tr, t_gen) = grok_star_times(lambda, eta0, eps).unwrap();
        assert!((t_tr / (pref * lambert_w0(z_tr).unwrap()) - 1.0).abs() < 1e-12);
        assert!((t_gen / (pref * lambert_w0(z_gen).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corrected_form_regime() {
        let c = grok_time_closed(0.5, 0.01, 1e-3, Order::Corrected).unwrap();
        assert!(c.delta_t > grok_time_leading(0.5, 0.01).unwrap() * 0.5);
        assert!(c.t_star_gen > c.t_star_tr);
        assert!(matches!(grok_time_closed(0.9, 0.01, 1e-3, Order::Corrected), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn axis_names() {
        assert_eq!("d_out".parse::<AxisName>().unwrap(), AxisName::DOut);
        assert!(matches!("eta".parse::<AxisName>(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn report_reasons() {
        let t = [0.0, 1.0, 2.0];
        let r =
            GrokReport::from_curves(&t, &[1.0, 1.0, 1.0], &[0.97, 1.0, 1.0], 0.95, Method::Empirical, None).unwrap();
        assert_eq!(r.no_grok_reason, Some(NoGrokReason::BothInstant));
        assert_eq!(r.delta_t, Some(0.0));
        let r = GrokReport::from_curves(&t, &[0.5, 1.0, 1.0], &[0.1, 0.2, 0.3], 0.95, Method::Empirical, Some(0.4))
            .unwrap();
        assert_eq!(r.no_grok_reason, Some(NoGrokReason::GenNeverConverges));
        let r = GrokReport::from_curves(&t, &[0.5, 1.0, 1.0], &[0.1, 0.2, 0.3], 0.95, Method::Empirical, None).unwrap();
        assert_eq!(r.no_grok_reason, Some(NoGrokReason::OutOfHorizon));
    }
}
