//! CSV and manifest files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use grokklab_core::analytic::PredictionCurve;
use grokklab_core::config::ExperimentConfig;
use grokklab_core::dynamics::Trace;
use grokklab_core::grok::PhaseGrid;
use serde::{Deserialize, Serialize};

pub const TRACE_HEADER: [&str; 5] = ["t", "l_tr", "l_gen", "a_tr", "a_gen"];
pub const PHASE_HEADER: [&str; 4] = ["axis1", "axis2", "delta_t", "status"];

/// Twelve significant digits.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

/// Column view shared by traces and prediction curves.
pub struct Columns<'a> {
    pub t: &'a [f64],
    pub l_tr: &'a [f64],
    pub l_gen: &'a [f64],
    pub a_tr: &'a [f64],
    pub a_gen: &'a [f64],
}

impl<'a> From<&'a Trace> for Columns<'a> {
    fn from(x: &'a Trace) -> Self {
        Self { t: &x.times, l_tr: &x.l_tr, l_gen: &x.l_gen, a_tr: &x.a_tr, a_gen: &x.a_gen }
    }
}

impl<'a> From<&'a PredictionCurve> for Columns<'a> {
    fn from(x: &'a PredictionCurve) -> Self {
        Self { t: &x.times, l_tr: &x.l_tr, l_gen: &x.l_gen, a_tr: &x.a_tr, a_gen: &x.a_gen }
    }
}

pub fn trace_csv_bytes(c: Columns<'_>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER)?;
    for i in 0..c.t.len() {
        w.write_record([c.t[i], c.l_tr[i], c.l_gen[i], c.a_tr[i], c.a_gen[i]].map(fmt12))?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV buffer: {e}"))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceRows {
    pub t: Vec<f64>,
    pub l_tr: Vec<f64>,
    pub l_gen: Vec<f64>,
    pub a_tr: Vec<f64>,
    pub a_gen: Vec<f64>,
}

pub fn parse_trace_csv(data: &[u8]) -> Result<TraceRows> {
    let mut r = csv::Reader::from_reader(data);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    anyhow::ensure!(header == TRACE_HEADER, "unexpected trace header {header:?}");
    let mut rows = TraceRows::default();
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<f64> = rec.iter().map(str::parse).collect::<Result<_, _>>().context("parsing trace value")?;
        anyhow::ensure!(v.len() == 5, "trace row with {} fields", v.len());
        rows.t.push(v[0]);
        rows.l_tr.push(v[1]);
        rows.l_gen.push(v[2]);
        rows.a_tr.push(v[3]);
        rows.a_gen.push(v[4]);
    }
    Ok(rows)
}

pub fn phase_csv_bytes(grid: &PhaseGrid) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PHASE_HEADER)?;
    for c in &grid.cells {
        let dt = match (c.report.delta_t, c.report.no_grok_reason) {
            (Some(d), None) => fmt12(d),
            _ => String::new(),
        };
        w.write_record([fmt12(c.axis1), fmt12(c.axis2), dt, status(&c.report).to_owned()])?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV buffer: {e}"))
}

pub fn status(r: &grokklab_core::grok::GrokReport) -> &'static str {
    use grokklab_core::grok::NoGrokReason::*;
    match r.no_grok_reason {
        None => "grok",
        Some(GenNeverConverges) => "gen-never-converges",
        Some(BothInstant) => "both-instant",
        Some(OutOfHorizon) => "out-of-horizon",
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// `runs/a.csv` → `runs/a.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub kind: String,
    /// Engine or method tag.
    pub producer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<Artifact>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            tool: "grokklab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            seeds: Vec::new(),
            artifacts: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn push(&mut self, a: Artifact) {
        if let Some(c) = &a.config {
            if !self.seeds.contains(&c.seed) {
                self.seeds.push(c.seed);
            }
        }
        self.artifacts.push(a);
    }

    pub fn write(&mut self, path: &Path, elapsed: Duration) -> Result<()> {
        self.wall_time_s = elapsed.as_secs_f64();
        write_file(path, serde_json::to_string_pretty(self)?.as_bytes())
    }
}

/// Path as recorded in a manifest: relative to the manifest's directory when possible.
pub fn relative_to(path: &Path, manifest: &Path) -> String {
    let base = manifest.parent().unwrap_or(Path::new(""));
    path.strip_prefix(base).unwrap_or(path).display().to_string()
}
