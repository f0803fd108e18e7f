//! Figure presets. Each writes the CSVs behind one figure plus a single
//! `manifest.json` that lists them.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use grokklab_core::analytic::{predict_curve, Model, PredictionParams};
use grokklab_core::config::{log_grid, Arch, ExperimentConfig};
use grokklab_core::dynamics::Trace;
use grokklab_core::grok::{
    analytic_report, grok_time_leading, phase_sweep, Axis, AxisName, GrokReport, Method, SweepMethod, DEFAULT_THRESHOLD,
};
use serde::Serialize;

use crate::args::{EngineArg, FigureArgs};
use crate::commands::{default_axis_values, run_engine, write_trace};
use crate::io::{self, Artifact, Columns, RunManifest};

pub const ETA0: f64 = 0.01;

pub struct Out {
    dir: PathBuf,
    manifest: RunManifest,
    markers: Vec<Marker>,
}

#[derive(Serialize)]
struct Marker {
    file: String,
    t_star_tr: Option<f64>,
    t_star_gen: Option<f64>,
    delta_t: Option<f64>,
    status: &'static str,
}

impl Out {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn mpath(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }

    fn trace(&mut self, name: &str, trace: &Trace) -> Result<()> {
        let (p, m) = (self.path(name), self.mpath());
        write_trace(trace, &p, &m, &mut self.manifest)?;
        let r = GrokReport::from_curves(
            &trace.times,
            &trace.a_tr,
            &trace.a_gen,
            DEFAULT_THRESHOLD,
            Method::Empirical,
            None,
        )?;
        self.mark(name, &r);
        Ok(())
    }

    fn prediction(&mut self, name: &str, params: PredictionParams, times: &[f64]) -> Result<()> {
        let curve = predict_curve(params, times)?;
        let p = self.path(name);
        io::write_file(&p, &io::trace_csv_bytes(Columns::from(&curve))?)?;
        self.manifest.push(Artifact {
            path: name.into(),
            kind: "prediction".into(),
            producer: "analytic-quadrature".into(),
            config: None,
            params: Some(serde_json::to_value(params)?),
        });
        let r = analytic_report(&params, DEFAULT_THRESHOLD)?;
        self.mark(name, &r);
        Ok(())
    }

    fn mark(&mut self, name: &str, r: &GrokReport) {
        self.markers.push(Marker {
            file: name.into(),
            t_star_tr: r.t_star_tr,
            t_star_gen: r.t_star_gen,
            delta_t: r.delta_t,
            status: io::status(r),
        });
    }

    fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>, params: serde_json::Value) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        io::write_file(&self.path(name), &w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
        self.manifest.push(Artifact {
            path: name.into(),
            kind: "table".into(),
            producer: "analytic-quadrature".into(),
            config: None,
            params: Some(params),
        });
        Ok(())
    }

    fn finish(mut self, start: Instant) -> Result<()> {
        let name = "markers.json";
        io::write_file(&self.path(name), serde_json::to_string_pretty(&self.markers)?.as_bytes())?;
        self.manifest.push(Artifact {
            path: name.into(),
            kind: "markers".into(),
            producer: "crossing-0.95".into(),
            config: None,
            params: None,
        });
        let m = self.mpath();
        self.manifest.write(&m, start.elapsed())
    }
}

pub fn figure(a: &FigureArgs, argv: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("figure{}", a.id)));
    let mut out = Out { dir, manifest: RunManifest::new(argv), markers: Vec::new() };
    match a.id {
        1 => figure1(a, &mut out)?,
        2 => figure2(a, &mut out)?,
        3 => figure3(a, &mut out)?,
        4 => figure4(a, &mut out)?,
        5 => figure5(a, &mut out)?,
        _ => unreachable!("clap restricts the figure id"),
    }
    out.finish(start)
}

fn with_zero(mut v: Vec<f64>) -> Vec<f64> {
    v.insert(0, 0.0);
    v
}

fn base(a: &FigureArgs, lambda: f64, grid: &[f64]) -> ExperimentConfig {
    let mut c = ExperimentConfig::with_lambda(a.scale, lambda);
    c.eta0 = ETA0;
    c.seed = a.seed;
    c.time_grid = grid.to_vec();
    c
}

fn label(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(io::fmt12).unwrap_or_default()
}

/// Losses and accuracies for λ = 0.1, 0.9, 1.5 and Δt against λ for three ε.
pub fn figure1(a: &FigureArgs, out: &mut Out) -> Result<()> {
    let grid = with_zero(log_grid(1.0, 1e6, 241)?);
    for lambda in [0.1, 0.9, 1.5] {
        let c = base(a, lambda, &grid);
        out.trace(&format!("trace_lambda_{}.csv", label(lambda)), &run_engine(&c, a.engine)?)?;
        let p = PredictionParams::one_layer(lambda, ETA0, c.epsilon);
        out.prediction(&format!("predict_lambda_{}.csv", label(lambda)), p, &grid)?;
    }
    let mut rows = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        for i in 1..50 {
            let lambda = 0.02 * i as f64;
            let r = analytic_report(&PredictionParams::one_layer(lambda, ETA0, eps), DEFAULT_THRESHOLD)?;
            let closed = grok_time_leading(lambda, ETA0)?;
            rows.push(vec![
                io::fmt12(lambda),
                io::fmt12(eps),
                fmt_opt(r.delta_t),
                io::fmt12(closed),
                io::status(&r).into(),
            ]);
        }
    }
    out.table(
        "grok_lambda.csv",
        &["lambda", "epsilon", "delta_t", "delta_t_closed", "status"],
        rows,
        serde_json::json!({ "eta0": ETA0, "d_out": 1 }),
    )
}

/// d_out = 1, 50, 700 at λ = 0.9 and Δt against d_out.
pub fn figure2(a: &FigureArgs, out: &mut Out) -> Result<()> {
    let grid = with_zero(log_grid(1.0, 1e8, 281)?);
    for d_out in [1usize, 50, 700] {
        let mut c = base(a, 0.9, &grid);
        c.d_out = d_out;
        out.trace(&format!("trace_dout_{d_out}.csv"), &run_engine(&c, a.engine)?)?;
        let p = PredictionParams { d_out, ..PredictionParams::one_layer(0.9, ETA0, c.epsilon) };
        out.prediction(&format!("predict_dout_{d_out}.csv"), p, &grid)?;
    }
    let mut d_outs = default_axis_values(AxisName::DOut);
    d_outs.extend([50.0, 700.0]);
    d_outs.sort_by(f64::total_cmp);
    d_outs.dedup();
    let mut rows = Vec::new();
    for lambda in [0.5, 0.7, 0.9] {
        for &k in &d_outs {
            let p = PredictionParams { d_out: k as usize, ..PredictionParams::one_layer(lambda, ETA0, 1e-3) };
            let r = analytic_report(&p, DEFAULT_THRESHOLD)?;
            rows.push(vec![io::fmt12(lambda), format!("{k}"), fmt_opt(r.delta_t), io::status(&r).into()]);
        }
    }
    out.table(
        "grok_dout.csv",
        &["lambda", "d_out", "delta_t", "status"],
        rows,
        serde_json::json!({ "eta0": ETA0, "epsilon": 1e-3 }),
    )
}

/// γ = 1e-5, 1e-3, 1e-2 at λ = 0.9 and Δt against γ.
pub fn figure3(a: &FigureArgs, out: &mut Out) -> Result<()> {
    let grid = with_zero(log_grid(1.0, 1e8, 281)?);
    for gamma in [1e-5, 1e-3, 1e-2] {
        let mut c = base(a, 0.9, &grid);
        c.gamma = gamma;
        out.trace(&format!("trace_gamma_{}.csv", label(gamma)), &run_engine(&c, a.engine)?)?;
        let p = PredictionParams { gamma, ..PredictionParams::one_layer(0.9, ETA0, c.epsilon) };
        out.prediction(&format!("predict_gamma_{}.csv", label(gamma)), p, &grid)?;
    }
    let mut rows = Vec::new();
    for lambda in [0.3, 0.5, 0.7, 0.9] {
        for gamma in default_axis_values(AxisName::Gamma) {
            let p = PredictionParams { gamma, ..PredictionParams::one_layer(lambda, ETA0, 1e-3) };
            let r = analytic_report(&p, DEFAULT_THRESHOLD)?;
            rows.push(vec![io::fmt12(lambda), io::fmt12(gamma), fmt_opt(r.delta_t), io::status(&r).into()]);
        }
    }
    out.table(
        "grok_gamma.csv",
        &["lambda", "gamma", "delta_t", "status"],
        rows,
        serde_json::json!({ "eta0": ETA0, "epsilon": 1e-3, "d_out": 1 }),
    )
}

/// Analytic phase grids over (γ, d_out), (γ, λ) and (d_out, λ).
pub fn figure4(a: &FigureArgs, out: &mut Out) -> Result<()> {
    let c = base(a, 0.9, &[]);
    let panels = [
        ("phase_gamma_dout.csv", AxisName::Gamma, AxisName::DOut),
        ("phase_gamma_lambda.csv", AxisName::Gamma, AxisName::Lambda),
        ("phase_dout_lambda.csv", AxisName::DOut, AxisName::Lambda),
    ];
    for (name, n1, n2) in panels {
        let ax1 = Axis::new(n1, default_axis_values(n1));
        let ax2 = Axis::new(n2, default_axis_values(n2));
        let grid = phase_sweep(&c, &ax1, &ax2, SweepMethod::Analytic)?;
        io::write_file(&out.path(name), &io::phase_csv_bytes(&grid)?)?;
        out.manifest.push(Artifact {
            path: name.into(),
            kind: "phase-grid".into(),
            producer: "analytic".into(),
            config: Some(c.clone()),
            params: Some(serde_json::json!({ "axis1": n1.as_str(), "axis2": n2.as_str() })),
        });
    }
    Ok(())
}

/// Two-layer students, d_in-d_h-5 with d_h = 50, 200, linear and tanh.
pub fn figure5(a: &FigureArgs, out: &mut Out) -> Result<()> {
    let grid = with_zero(log_grid(100.0, 5e4, 40)?);
    for arch in [Arch::TwoLayerLinear, Arch::TwoLayerTanh] {
        for d_h in [50usize, 200] {
            let mut c = two_layer_config(a.scale, arch, d_h, a.seed);
            c.time_grid = grid.clone();
            let trace = run_engine(&c, EngineArg::Iterative)?;
            let tag = format!("{}_dh_{d_h}", arch.name());
            out.trace(&format!("trace_{tag}.csv"), &trace)?;
            let p = two_layer_prediction(&c, &trace);
            out.prediction(&format!("predict_{tag}.csv"), p, &grid)?;
        }
    }
    Ok(())
}

/// 1000-d_h-5 at λ = 1/2, ε = 1e-4; GD step η = 1 (dt = 100) keeps the run short.
pub fn two_layer_config(d_in: usize, arch: Arch, d_h: usize, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::with_lambda(d_in, 0.5);
    c.arch = arch;
    c.d_h = d_h;
    c.d_out = 5;
    c.eta0 = ETA0;
    c.epsilon = 1e-4;
    c.dt = 100.0;
    c.seed = seed;
    c
}

/// Linear two-layer prediction normalized by the run's own initial error,
/// ‖D₀‖² = d_out · l_gen(0).
pub fn two_layer_prediction(c: &ExperimentConfig, trace: &Trace) -> PredictionParams {
    let d0 = if trace.times.first() == Some(&0.0) { c.d_out as f64 * trace.l_gen[0] } else { trace.d0_norm_sq };
    PredictionParams {
        lambda: c.lambda(),
        eta0: c.eta0,
        gamma: 0.0,
        d_out: c.d_out,
        epsilon: c.epsilon,
        model: Model::TwoLayer { d0_norm_sq: d0 },
    }
}
