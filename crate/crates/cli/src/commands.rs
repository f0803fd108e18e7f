//! simulate, predict, grok-time and phase-diagram.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use grokklab_core::analytic::{predict_curve, two_layer_d0_norm_sq, Model, PredictionParams};
use grokklab_core::config::{log_grid, ExperimentConfig};
use grokklab_core::dynamics::{run_iterative, run_spectral, training_gram, Trace};
use grokklab_core::grok::{
    analytic_report, empirical_report, grok_star_times, grok_time_closed, grok_time_wd, phase_sweep, Axis, AxisName,
    Method, NoGrokReason, Order, SweepMethod, DEFAULT_THRESHOLD,
};
use grokklab_core::Error as CoreError;
use serde::Serialize;

use crate::args::{EngineArg, GrokArgs, GrokMethod, PhaseArgs, RunArgs, SimulateArgs, SweepArg};
use crate::io::{self, Artifact, Columns, RunManifest};
use crate::UsageError;

pub fn simulate(a: &SimulateArgs, argv: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let c = a.run.build()?;
    let trace = run_engine(&c, a.engine)?;
    let out = a.run.out.clone().unwrap_or_else(|| PathBuf::from("trace.csv"));
    let mpath = io::manifest_path(&out);
    let mut m = RunManifest::new(argv);
    write_trace(&trace, &out, &mpath, &mut m)?;
    m.write(&mpath, start.elapsed())
}

pub fn run_engine(c: &ExperimentConfig, engine: EngineArg) -> Result<Trace> {
    Ok(match engine {
        EngineArg::Iterative => run_iterative(c)?,
        EngineArg::Spectral => run_spectral(c, &training_gram(c)?)?,
    })
}

/// Trace CSV, plus a `t,h` file for two-layer runs, registered in `m`.
pub fn write_trace(trace: &Trace, out: &std::path::Path, mpath: &std::path::Path, m: &mut RunManifest) -> Result<()> {
    io::write_file(out, &io::trace_csv_bytes(Columns::from(trace))?)?;
    let producer = format!("{:?}", trace.engine).to_lowercase();
    m.push(Artifact {
        path: io::relative_to(out, mpath),
        kind: "trace".into(),
        producer: producer.clone(),
        config: Some(trace.config.clone()),
        params: Some(serde_json::json!({ "d0_norm_sq": trace.d0_norm_sq })),
    });
    if let Some(h) = &trace.h {
        let hpath = out.with_extension("h.csv");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "h"])?;
        for (t, h) in trace.times.iter().zip(h) {
            w.write_record([io::fmt12(*t), io::fmt12(*h)])?;
        }
        io::write_file(&hpath, &w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
        m.push(Artifact {
            path: io::relative_to(&hpath, mpath),
            kind: "kernel-trace".into(),
            producer,
            config: None,
            params: None,
        });
    }
    Ok(())
}

pub fn prediction_params(c: &ExperimentConfig, lambda: f64) -> PredictionParams {
    let model = if c.arch.is_two_layer() {
        Model::TwoLayer { d0_norm_sq: two_layer_d0_norm_sq(c.d_h) }
    } else {
        Model::OneLayer
    };
    PredictionParams { lambda, eta0: c.eta0, gamma: c.gamma, d_out: c.d_out, epsilon: c.epsilon, model }
}

pub fn predict(a: &RunArgs, argv: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let s = a.setup()?;
    let params = prediction_params(&s.config, s.lambda);
    let curve = predict_curve(params, &s.config.time_grid)?;
    let bytes = io::trace_csv_bytes(Columns::from(&curve))?;
    match &a.out {
        None => std::io::stdout().write_all(&bytes)?,
        Some(out) => {
            io::write_file(out, &bytes)?;
            let mpath = io::manifest_path(out);
            let mut m = RunManifest::new(argv);
            m.push(Artifact {
                path: io::relative_to(out, &mpath),
                kind: "prediction".into(),
                producer: "analytic-quadrature".into(),
                config: Some(s.config.clone()),
                params: Some(serde_json::to_value(params)?),
            });
            m.write(&mpath, start.elapsed())?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct GrokJson {
    pub method: String,
    pub lambda: f64,
    pub eta0: f64,
    pub epsilon: f64,
    pub d_out: usize,
    pub gamma: f64,
    pub threshold: f64,
    pub t_star_tr: Option<f64>,
    pub t_star_gen: Option<f64>,
    pub delta_t: Option<f64>,
    pub no_grok_reason: Option<NoGrokReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn grok_time(a: &GrokArgs) -> Result<GrokJson> {
    let s = a.run.setup()?;
    let c = &s.config;
    let mut j = GrokJson {
        method: format!("{:?}", a.method),
        lambda: s.lambda,
        eta0: c.eta0,
        epsilon: c.epsilon,
        d_out: c.d_out,
        gamma: c.gamma,
        threshold: DEFAULT_THRESHOLD,
        t_star_tr: None,
        t_star_gen: None,
        delta_t: None,
        no_grok_reason: None,
        spread: None,
        note: None,
    };
    let closed_only = |what: &str| -> Result<()> {
        if c.d_out != 1 || c.arch.is_two_layer() {
            bail!(UsageError(format!("{what} is derived for one-layer students with d_out = 1")));
        }
        Ok(())
    };
    match a.method {
        GrokMethod::ClosedLeading | GrokMethod::ClosedCorrected => {
            closed_only("the closed-form grokking time")?;
            let order = if a.method == GrokMethod::ClosedLeading { Order::Leading } else { Order::Corrected };
            match grok_time_closed(s.lambda, c.eta0, c.epsilon, order) {
                Ok(r) => {
                    j.t_star_tr = Some(r.t_star_tr);
                    j.t_star_gen = Some(r.t_star_gen);
                    j.delta_t = Some(r.delta_t);
                }
                // The Lambert-W times stay valid when the ε-expansion of their difference does not.
                Err(CoreError::OutOfRegime(msg)) => {
                    let (tr, gen) = grok_star_times(s.lambda, c.eta0, c.epsilon)?;
                    j.t_star_tr = Some(tr);
                    j.t_star_gen = Some(gen);
                    j.note = Some(msg);
                }
                Err(e) => return Err(e.into()),
            }
        }
        GrokMethod::ClosedWd => {
            closed_only("the weight-decay grokking time")?;
            j.delta_t = Some(grok_time_wd(s.lambda, c.eta0)?);
        }
        GrokMethod::Quadrature => {
            let r = analytic_report(&prediction_params(c, s.lambda), DEFAULT_THRESHOLD)?;
            j.t_star_tr = r.t_star_tr;
            j.t_star_gen = r.t_star_gen;
            j.delta_t = r.delta_t;
            j.no_grok_reason = r.no_grok_reason;
        }
        GrokMethod::Empirical => {
            let (r, spread) = empirical_report(c, a.seeds)?;
            debug_assert_eq!(r.method, Method::Empirical);
            j.t_star_tr = r.t_star_tr;
            j.t_star_gen = r.t_star_gen;
            j.delta_t = r.delta_t;
            j.no_grok_reason = r.no_grok_reason;
            j.spread = spread;
        }
    }
    j.method = match a.method {
        GrokMethod::ClosedLeading => "closed-leading",
        GrokMethod::ClosedCorrected => "closed-corrected",
        GrokMethod::ClosedWd => "closed-wd",
        GrokMethod::Quadrature => "quadrature",
        GrokMethod::Empirical => "empirical",
    }
    .into();
    Ok(j)
}

pub fn grok_time_cmd(a: &GrokArgs, argv: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let j = grok_time(a)?;
    let text = serde_json::to_string_pretty(&j)? + "\n";
    match &a.run.out {
        None => std::io::stdout().write_all(text.as_bytes())?,
        Some(out) => {
            io::write_file(out, text.as_bytes())?;
            let mpath = io::manifest_path(out);
            let mut m = RunManifest::new(argv);
            m.push(Artifact {
                path: io::relative_to(out, &mpath),
                kind: "grok-report".into(),
                producer: j.method.clone(),
                config: Some(a.run.build()?),
                params: None,
            });
            m.write(&mpath, start.elapsed())?;
        }
    }
    Ok(())
}

pub fn default_axis_values(name: AxisName) -> Vec<f64> {
    match name {
        AxisName::Lambda => (0..20).map(|i| 0.05 + 0.1 * i as f64).collect(),
        AxisName::Gamma => log_grid(1e-6, 1e-1, 21).expect("static grid"),
        AxisName::DOut => {
            let mut v: Vec<f64> = log_grid(1.0, 1000.0, 24).expect("static grid").iter().map(|x| x.round()).collect();
            v.dedup();
            v
        }
    }
}

pub fn phase_diagram(a: &PhaseArgs, argv: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let parse = |s: &str| s.parse::<AxisName>().map_err(|e| UsageError(e.to_string()));
    let (n1, n2) = (parse(&a.axis1)?, parse(&a.axis2)?);
    let ax1 = Axis::new(n1, a.values1.clone().unwrap_or_else(|| default_axis_values(n1)));
    let ax2 = Axis::new(n2, a.values2.clone().unwrap_or_else(|| default_axis_values(n2)));
    let c = a.run.build()?;
    let method = match a.method {
        SweepArg::Analytic => SweepMethod::Analytic,
        SweepArg::Empirical => SweepMethod::Empirical { seeds: a.seeds },
    };
    let grid = phase_sweep(&c, &ax1, &ax2, method)?;
    let out = a.run.out.clone().unwrap_or_else(|| PathBuf::from("phase.csv"));
    io::write_file(&out, &io::phase_csv_bytes(&grid)?)?;
    let mpath = io::manifest_path(&out);
    let mut m = RunManifest::new(argv);
    m.push(Artifact {
        path: io::relative_to(&out, &mpath),
        kind: "phase-grid".into(),
        producer: format!("{method:?}").to_lowercase(),
        config: Some(c),
        params: Some(serde_json::json!({ "axis1": n1.as_str(), "axis2": n2.as_str() })),
    });
    m.write(&mpath, start.elapsed())
}
