//! Run configuration, the time loop and file output.
//!
//! Configuration files are flat `key = value` lines with `#` comments. Every
//! run writes `timeseries.csv`, a `run.json` manifest and, at each snapshot
//! time, `fields_t<T>.csv` plus `slice_x<pos>_t<T>.csv`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::{evaluate_1d_reference, gauss_legendre, BasisFamily};
use crate::diagnostics::{distribution_slice, record, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::maxwell::FluxKind;
use crate::mesh::{PhaseMesh, DEFAULT_VELOCITY_BOUND};
use crate::scenario::{initial_state, Scenario};
use crate::space::Discretization;
use crate::time::{compute_dt, SolutionState, StepControl, VlasovMaxwell};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "VLASOV_DG_OUTPUT_DIR";

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Preset the scenario parameters started from.
    pub preset: String,
    pub scenario: Scenario,
    pub n_x: usize,
    pub n_v1: usize,
    pub n_v2: usize,
    pub velocity_bound: f64,
    pub degree: usize,
    pub basis: BasisFamily,
    pub flux: FluxKind,
    pub step: StepControl,
    pub t_end: f64,
    /// Diagnostics every this many steps, plus the first and last state.
    pub diagnostics_every: usize,
    pub snapshot_times: Vec<f64>,
    pub slice_x: f64,
    pub slice_resolution: usize,
    /// Gauss points per direction for projecting the initial data; `None` means `k + 4`.
    pub projection_points: Option<usize>,
    /// Gauss points per direction in the operators; `None` means `k + 2`.
    pub operator_points: Option<usize>,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: "weibel-choice1".into(),
            scenario: Scenario::preset("weibel-choice1").expect("built-in preset"),
            n_x: 40,
            n_v1: 40,
            n_v2: 40,
            velocity_bound: DEFAULT_VELOCITY_BOUND,
            degree: 2,
            basis: BasisFamily::PType,
            flux: FluxKind::Upwind,
            step: StepControl::default(),
            t_end: 100.0,
            diagnostics_every: 10,
            snapshot_times: Vec::new(),
            slice_x: 0.05 * std::f64::consts::PI,
            slice_resolution: 64,
            projection_points: None,
            operator_points: None,
            threads: 0,
            output_dir: PathBuf::from("output"),
        }
    }
}

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_error(line, format!("cannot parse '{value}' as the value of '{key}'")))
}

fn parse_basis(line: usize, value: &str) -> Result<BasisFamily> {
    match value.to_ascii_lowercase().as_str() {
        "p" | "p-type" | "ptype" => Ok(BasisFamily::PType),
        "q" | "q-type" | "qtype" => Ok(BasisFamily::QType),
        _ => Err(config_error(line, format!("unknown basis '{value}' (expected p or q)"))),
    }
}

fn basis_name(b: BasisFamily) -> &'static str {
    match b {
        BasisFamily::PType => "p",
        BasisFamily::QType => "q",
    }
}

/// Parses configuration text. Unknown keys, malformed values, unknown presets
/// and parameters that do not belong to the chosen scenario are errors that
/// carry the offending line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line, format!("expected 'key = value', found '{content}'")))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(config_error(line, format!("missing value for '{key}'")));
        }
        if let Some((first, _)) = entries.insert(key.clone(), (line, value)) {
            return Err(config_error(line, format!("'{key}' already set on line {first}")));
        }
    }

    let mut cfg = RunConfig::default();
    if let Some((line, name)) = entries.remove("scenario") {
        cfg.scenario = Scenario::preset(&name).map_err(|e| config_error(line, e.to_string()))?;
        cfg.preset = name;
    }
    if let Some((line, value)) = entries.remove("mesh") {
        let n: usize = parse_value(line, "mesh", &value)?;
        (cfg.n_x, cfg.n_v1, cfg.n_v2) = (n, n, n);
    }

    for (key, (line, value)) in &entries {
        let (line, v) = (*line, value.as_str());
        match key.as_str() {
            "n_x" => cfg.n_x = parse_value(line, key, v)?,
            "n_v1" => cfg.n_v1 = parse_value(line, key, v)?,
            "n_v2" => cfg.n_v2 = parse_value(line, key, v)?,
            "velocity_bound" => cfg.velocity_bound = parse_value(line, key, v)?,
            "k" | "degree" => cfg.degree = parse_value(line, key, v)?,
            "basis" => cfg.basis = parse_basis(line, v)?,
            "flux" => cfg.flux = FluxKind::parse(v).map_err(|e| config_error(line, e.to_string()))?,
            "cfl" => cfg.step.cfl = parse_value(line, key, v)?,
            "dt" => cfg.step.fixed_dt = Some(parse_value(line, key, v)?),
            "high_order_dt_coefficient" => cfg.step.high_order_coefficient = parse_value(line, key, v)?,
            "t_end" | "t" => cfg.t_end = parse_value(line, key, v)?,
            "diagnostics_every" => cfg.diagnostics_every = parse_value(line, key, v)?,
            "snapshot_times" => {
                cfg.snapshot_times = if v == "none" {
                    Vec::new()
                } else {
                    v.split(',').map(|s| parse_value(line, key, s.trim())).collect::<Result<_>>()?
                }
            }
            "slice_x" => cfg.slice_x = parse_value(line, key, v)?,
            "slice_resolution" => cfg.slice_resolution = parse_value(line, key, v)?,
            "projection_points" => cfg.projection_points = Some(parse_value(line, key, v)?),
            "operator_points" => cfg.operator_points = Some(parse_value(line, key, v)?),
            "threads" => cfg.threads = parse_value(line, key, v)?,
            "output_dir" => cfg.output_dir = PathBuf::from(v),
            param => set_scenario_param(&mut cfg.scenario, line, param, parse_value(line, param, v).ok())?,
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_scenario_param(scenario: &mut Scenario, line: usize, key: &str, value: Option<f64>) -> Result<()> {
    let slot: Option<&mut f64> = match (scenario, key) {
        (Scenario::Weibel(p), "beta") => Some(&mut p.beta),
        (Scenario::Weibel(p), "b") => Some(&mut p.b),
        (Scenario::Weibel(p), "delta") => Some(&mut p.delta),
        (Scenario::Weibel(p), "v01") => Some(&mut p.v01),
        (Scenario::Weibel(p), "v02") => Some(&mut p.v02),
        (Scenario::Weibel(p), "k0") => Some(&mut p.k0),
        (Scenario::FreeStream(p), "k0") => Some(&mut p.k0),
        (Scenario::FreeStream(p), "amplitude") => Some(&mut p.amplitude),
        (Scenario::FreeStream(p), "width") => Some(&mut p.width),
        (Scenario::VacuumMaxwell(p), "k0") => Some(&mut p.k0),
        (Scenario::VacuumMaxwell(p), "amplitude") => Some(&mut p.amplitude),
        _ => None,
    };
    match (slot, value) {
        (Some(s), Some(v)) => {
            *s = v;
            Ok(())
        }
        (Some(_), None) => Err(config_error(line, format!("'{key}' expects a number"))),
        (None, _) => Err(config_error(line, format!("unknown key '{key}' for this scenario"))),
    }
}

fn scenario_params(scenario: &Scenario) -> Vec<(&'static str, f64)> {
    match scenario {
        Scenario::Weibel(p) => vec![("beta", p.beta), ("b", p.b), ("delta", p.delta), ("v01", p.v01), ("v02", p.v02), ("k0", p.k0)],
        Scenario::FreeStream(p) => vec![("k0", p.k0), ("amplitude", p.amplitude), ("width", p.width)],
        Scenario::VacuumMaxwell(p) => vec![("k0", p.k0), ("amplitude", p.amplitude)],
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        Scenario::preset(&self.preset)?;
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive");
        }
        if self.diagnostics_every == 0 {
            return bad("diagnostics_every must be at least 1");
        }
        if !(self.step.cfl > 0.0) {
            return bad("cfl must be positive");
        }
        if self.slice_resolution == 0 {
            return bad("slice_resolution must be positive");
        }
        if self.snapshot_times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            return bad("snapshot times must lie in [0, t_end]");
        }
        self.mesh()?;
        Ok(())
    }

    pub fn mesh(&self) -> Result<PhaseMesh> {
        PhaseMesh::new(self.scenario.domain(self.velocity_bound)?, self.n_x, self.n_v1, self.n_v2)
    }

    pub fn discretization(&self) -> Result<Discretization> {
        let points = self.operator_points.unwrap_or(self.degree + 2);
        Discretization::with_quadrature(self.mesh()?, self.degree, self.basis, points)
    }

    /// Writes the configuration back as text; [`parse_config`] inverts it.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        put("scenario", self.preset.clone());
        for (k, v) in scenario_params(&self.scenario) {
            put(k, format!("{v:?}"));
        }
        put("n_x", self.n_x.to_string());
        put("n_v1", self.n_v1.to_string());
        put("n_v2", self.n_v2.to_string());
        put("velocity_bound", format!("{:?}", self.velocity_bound));
        put("degree", self.degree.to_string());
        put("basis", basis_name(self.basis).into());
        put("flux", self.flux.name().into());
        put("cfl", format!("{:?}", self.step.cfl));
        if let Some(dt) = self.step.fixed_dt {
            put("dt", format!("{dt:?}"));
        }
        put("high_order_dt_coefficient", format!("{:?}", self.step.high_order_coefficient));
        put("t_end", format!("{:?}", self.t_end));
        put("diagnostics_every", self.diagnostics_every.to_string());
        let snaps: Vec<String> = self.snapshot_times.iter().map(|t| format!("{t:?}")).collect();
        put("snapshot_times", if snaps.is_empty() { "none".into() } else { snaps.join(", ") });
        put("slice_x", format!("{:?}", self.slice_x));
        put("slice_resolution", self.slice_resolution.to_string());
        if let Some(p) = self.projection_points {
            put("projection_points", p.to_string());
        }
        if let Some(p) = self.operator_points {
            put("operator_points", p.to_string());
        }
        put("threads", self.threads.to_string());
        put("output_dir", self.output_dir.display().to_string());
        s
    }

    /// Reads the configuration recorded in a `run.json` manifest.
    pub fn from_manifest(json: &str) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(json)?;
        Ok(manifest.config)
    }
}

/// Contents of `run.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub program: String,
    pub version: String,
    pub config: RunConfig,
    pub config_text: String,
    pub steps: Option<usize>,
    pub final_time: Option<f64>,
}

/// Output directory after applying the environment override.
pub fn resolve_output_dir(config: &RunConfig, env_override: Option<String>) -> PathBuf {
    match env_override {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => config.output_dir.clone(),
    }
}

/// Label used in snapshot file names, e.g. `12.500`.
pub fn time_label(t: f64) -> String {
    format!("{t:.3}")
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub final_state: SolutionState,
    pub records: Vec<DiagnosticsRecord>,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Options that do not affect the numerical result.
#[derive(Default)]
pub struct RunHooks<'a> {
    /// Called with each diagnostics row as it is written.
    pub on_record: Option<&'a mut (dyn FnMut(&DiagnosticsRecord) + Send)>,
    /// Skip every file; only the returned summary is produced.
    pub in_memory: bool,
}

/// Runs `config`, honouring [`OUTPUT_DIR_ENV`].
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    run_with(config, RunHooks::default())
}

pub fn run_with(config: &RunConfig, hooks: RunHooks<'_>) -> Result<RunSummary> {
    config.validate()?;
    if config.threads == 0 {
        return run_inner(config, hooks);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_inner(config, hooks))
}

struct Outputs {
    dir: PathBuf,
    timeseries: Option<BufWriter<File>>,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn create(dir: PathBuf, enabled: bool) -> Result<Self> {
        let mut out = Outputs { dir, timeseries: None, files: Vec::new() };
        if enabled {
            fs::create_dir_all(&out.dir)?;
            let path = out.dir.join("timeseries.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "{}", DiagnosticsRecord::csv_header())?;
            out.timeseries = Some(w);
            out.files.push(path);
        }
        Ok(out)
    }

    fn row(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        if let Some(w) = self.timeseries.as_mut() {
            writeln!(w, "{}", rec.csv_row())?;
            w.flush()?;
        }
        Ok(())
    }

    fn enabled(&self) -> bool {
        self.timeseries.is_some()
    }
}

fn run_inner(config: &RunConfig, mut hooks: RunHooks<'_>) -> Result<RunSummary> {
    let disc = config.discretization()?;
    let points = config.projection_points.unwrap_or(config.degree + 4);
    let mut state = initial_state(&disc, &config.scenario, points)?;
    let op = VlasovMaxwell::new(&disc, config.flux).with_coupling(config.scenario.coupling());
    let dir = resolve_output_dir(config, std::env::var(OUTPUT_DIR_ENV).ok());
    let mut out = Outputs::create(dir, !hooks.in_memory)?;
    write_manifest(config, &mut out, None)?;

    let mut snapshots: Vec<f64> = config.snapshot_times.clone();
    snapshots.sort_by(f64::total_cmp);
    snapshots.dedup();
    let mut next_snapshot = 0;

    let mut records = Vec::new();
    let mut emit = |state: &SolutionState, out: &mut Outputs, records: &mut Vec<DiagnosticsRecord>| -> Result<()> {
        let rec = record(&disc, state, config.flux)?;
        out.row(&rec)?;
        if let Some(cb) = hooks.on_record.as_mut() {
            cb(&rec);
        }
        records.push(rec);
        Ok(())
    };
    emit(&state, &mut out, &mut records)?;

    let tol = 1e-12 * config.t_end.max(1.0);
    let mut steps = 0usize;
    loop {
        while next_snapshot < snapshots.len() && snapshots[next_snapshot] <= state.t + tol {
            write_snapshot(&disc, &state, config, &mut out)?;
            next_snapshot += 1;
        }
        if state.t >= config.t_end - tol {
            break;
        }
        let target = snapshots.get(next_snapshot).copied().unwrap_or(config.t_end).min(config.t_end);
        let mut dt = compute_dt(&state, &disc, &config.step)?;
        if state.t + dt > target - tol {
            dt = target - state.t;
        }
        let next = op.step(&state, dt).map_err(|e| match e {
            Error::NonFinite { what, detail } => {
                Error::NonFinite { what, detail: format!("{detail}; step {} at t = {}", steps + 1, state.t) }
            }
            other => other,
        })?;
        state = next;
        if (target - state.t).abs() <= tol {
            state.t = target;
        }
        steps += 1;
        if steps % config.diagnostics_every == 0 {
            emit(&state, &mut out, &mut records)?;
        }
    }
    emit(&state, &mut out, &mut records)?;
    write_manifest(config, &mut out, Some((steps, state.t)))?;
    Ok(RunSummary { steps, final_state: state, records, output_dir: out.dir.clone(), files: out.files })
}

fn write_manifest(config: &RunConfig, out: &mut Outputs, done: Option<(usize, f64)>) -> Result<()> {
    if !out.enabled() {
        return Ok(());
    }
    let manifest = Manifest {
        program: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        config_text: config.to_text(),
        steps: done.map(|d| d.0),
        final_time: done.map(|d| d.1),
    };
    let path = out.dir.join("run.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    if !out.files.contains(&path) {
        out.files.push(path);
    }
    Ok(())
}

fn write_snapshot(disc: &Discretization, state: &SolutionState, config: &RunConfig, out: &mut Outputs) -> Result<()> {
    if !out.enabled() {
        return Ok(());
    }
    let label = time_label(state.t);
    let path = out.dir.join(format!("fields_t{label}.csv"));
    write_fields(&path, disc, state)?;
    out.files.push(path);

    let slice = distribution_slice(disc, &state.f, config.slice_x, config.slice_resolution)?;
    let path = out.dir.join(format!("slice_x{}_t{label}.csv", time_label(config.slice_x)));
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "# vlasov-dg slice schema_version=1 x={:e} t={:e}", slice.x, state.t)?;
    writeln!(w, "xi1,xi2,f")?;
    let n2 = slice.xi2.len();
    for (a, u) in slice.xi1.iter().enumerate() {
        for (b, v) in slice.xi2.iter().enumerate() {
            writeln!(w, "{u:e},{v:e},{:e}", slice.values[a * n2 + b])?;
        }
    }
    w.flush()?;
    out.files.push(path);
    Ok(())
}

/// One row per (cell, Gauss node): the nodal values of `E1, E2, B3`
/// followed by the cell's modal coefficients.
fn write_fields(path: &Path, disc: &Discretization, state: &SolutionState) -> Result<()> {
    let mesh = &disc.mesh;
    let r = disc.n_field_modes();
    let rule = gauss_legendre(r)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vlasov-dg fields schema_version=1 t={:e}", state.t)?;
    let mut header = vec!["cell".to_string(), "node".into(), "x".into(), "E1".into(), "E2".into(), "B3".into()];
    for name in ["E1", "E2", "B3"] {
        header.extend((0..r).map(|a| format!("{name}_m{a}")));
    }
    writeln!(w, "{}", header.join(","))?;
    let comps = state.fields.components();
    for i in 0..mesh.n_x {
        let modal: Vec<String> = comps.iter().flat_map(|c| c.cell(i).iter().map(|v| format!("{v:e}"))).collect();
        for (q, e) in rule.nodes.iter().enumerate() {
            let x = mesh.x_center(i) + 0.5 * mesh.h_x * e;
            let vals: Vec<String> = comps.iter().map(|c| format!("{:e}", evaluate_1d_reference(c.cell(i), *e))).collect();
            writeln!(w, "{i},{q},{x:e},{},{}", vals.join(","), modal.join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}
