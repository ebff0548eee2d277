//! Command-line surface: flat-file + flag configuration, subcommands
//! orchestrating the solver modules, and deterministic CSV/JSON output for
//! external plotting.
//!
//! Outputs are byte-reproducible for a fixed configuration: floats carry 17
//! significant digits (round-trip safe), rows follow grid order, and lines
//! end with LF. A subcommand that fails midway leaves its outputs with a
//! `.partial` suffix. Exit codes: 0 success, 2 validation error, 3 numerical
//! failure.

use crate::bifurcation::{BifurcationAnalysis, BifurcationError, CorrectionOrder};
use crate::domain::{GeometryParams, PhysicalParams};
use crate::dynamics::{
    energy_by_block, energy_perturbation, energy_total, perturbed_basic_state, sensitivity_run,
    SimConfig, Simulation,
};
use crate::linstab;
use crate::spectral::{eigenfields, sample_grid, SpectralField};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Duct Kolmogorov flow toolkit: linear spectrum, critical Reynolds numbers,
/// Landau coefficients, secondary states, and nonlinear time marching.
#[derive(Debug, Parser)]
#[command(name = "kolmoduct", version, about)]
pub struct Cli {
    /// Flat `key = value` configuration file (# comments); flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Friction number, >= 0.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Reynolds number, > 0.
    #[arg(long, global = true)]
    pub reynolds: Option<f64>,
    /// Streamwise wavenumber, > 0.
    #[arg(long, global = true)]
    pub kx: Option<f64>,
    /// Wall count N >= 2 (duct height 2 N pi).
    #[arg(long, global = true)]
    pub walls: Option<u32>,
    /// Mode family j, 1 <= j <= N-1.
    #[arg(long, global = true)]
    pub jmode: Option<u32>,
    /// Streamwise truncation |m| <= mx-max (>= 2).
    #[arg(long, global = true)]
    pub mx_max: Option<i64>,
    /// Wall-normal truncation c <= c-max (>= 2N; default 64 N).
    #[arg(long, global = true)]
    pub c_max: Option<u32>,
    /// Time step cap; the run also respects the linear stability scale.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Simulation horizon.
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    /// Steady-state residual threshold.
    #[arg(long, global = true)]
    pub steady_tol: Option<f64>,
    /// Time between snapshots / residual checks.
    #[arg(long, global = true)]
    pub snapshot_every: Option<f64>,
    /// Seed for random initial data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Phase on the circle of secondary states.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Expansion order of the secondary state (1 or 2).
    #[arg(long, global = true)]
    pub order: Option<u8>,
    /// Number of trajectories in a sensitivity ensemble (>= 2).
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    /// Scale of the random initial perturbation.
    #[arg(long, global = true)]
    pub perturb_scale: Option<f64>,
    /// Reynolds grid: `start:step:end` or comma list.
    #[arg(long, global = true)]
    pub reynolds_grid: Option<String>,
    /// Wavenumber grid: `start:step:end` or comma list.
    #[arg(long, global = true)]
    pub kx_grid: Option<String>,
    /// Grid points along x for field output (default 241).
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    /// Grid points along y for field output (default 60 N + 1).
    #[arg(long, global = true)]
    pub ny: Option<usize>,
    /// Tabular output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Field source for the `field` subcommand: basic | eigen | secondary.
    #[arg(long, global = true)]
    pub source: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue sigma over a Reynolds grid -> sigma_curve.csv.
    SigmaCurve,
    /// Critical Reynolds number over a kx grid -> neutral.csv plus minimum sidecar.
    NeutralCurve,
    /// Eigenfunction coefficients and field -> eigen.csv, eigen_field.csv.
    Eigenfunction,
    /// Landau coefficients and amplitude law -> landau.json.
    Landau,
    /// Analytic secondary state -> field.csv, secondary.json.
    Secondary,
    /// Nonlinear time marching -> timeseries.csv, field.csv.
    Simulate,
    /// Render a field on a grid -> field.csv.
    Field,
    /// Seeded trajectory ensemble -> sensitivity.csv, sensitivity_summary.json.
    Sensitivity,
}

/// Fully resolved run configuration (defaults < file < flags).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub lambda: f64,
    pub reynolds: f64,
    pub kx: f64,
    pub walls: u32,
    pub jmode: u32,
    pub mx_max: i64,
    pub c_max: Option<u32>,
    pub dt: f64,
    pub t_end: f64,
    pub steady_tol: f64,
    pub snapshot_every: f64,
    pub seed: u64,
    pub theta: f64,
    pub order: u8,
    pub runs: usize,
    pub perturb_scale: f64,
    pub reynolds_grid: Option<Vec<f64>>,
    pub kx_grid: Option<Vec<f64>>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub format: OutputFormat,
    pub source: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
            lambda: 20.0,
            reynolds: 2000.0,
            kx: 0.7,
            walls: 4,
            jmode: 1,
            mx_max: 2,
            c_max: None,
            dt: f64::INFINITY,
            t_end: 20_000.0,
            steady_tol: 1e-9,
            snapshot_every: 50.0,
            seed: 0,
            theta: 0.0,
            order: 2,
            runs: 4,
            perturb_scale: 1e-3,
            reynolds_grid: None,
            kx_grid: None,
            nx: None,
            ny: None,
            format: OutputFormat::Csv,
            source: "secondary".into(),
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    let bad = |what: &str| validation(format!("cannot parse grid '{text}': {what}"));
    if text.is_empty() {
        Ok(Vec::new())
    } else if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:end"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e: std::num::ParseFloatError| bad(&e.to_string()))?;
        let (start, step, end) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0 && end >= start) {
            return Err(bad("need step > 0 and end >= start"));
        }
        let count = ((end - start) / step + 1.5).floor() as usize;
        Ok((0..count)
            .map(|i| start + step * i as f64)
            .filter(|&v| v <= end + 1e-9 * step)
            .collect())
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
            .collect()
    }
}

const CONFIG_KEYS: &[&str] = &[
    "out",
    "lambda",
    "reynolds",
    "kx",
    "walls",
    "jmode",
    "mx_max",
    "c_max",
    "dt",
    "t_end",
    "steady_tol",
    "snapshot_every",
    "seed",
    "theta",
    "order",
    "runs",
    "perturb_scale",
    "reynolds_grid",
    "kx_grid",
    "nx",
    "ny",
    "format",
    "source",
];

fn parse_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(validation(format!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(validation(format!(
                "{}:{}: unknown key '{key}'",
                path.display(),
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_from<T: std::str::FromStr>(
    map: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| validation(format!("config key '{key}' = '{raw}': {e}"))),
    }
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &cli.config {
            let map = parse_config_file(path)?;
            if let Some(v) = map.get("out") {
                cfg.out_dir = PathBuf::from(v);
            }
            if let Some(v) = parse_from(&map, "lambda")? {
                cfg.lambda = v;
            }
            if let Some(v) = parse_from(&map, "reynolds")? {
                cfg.reynolds = v;
            }
            if let Some(v) = parse_from(&map, "kx")? {
                cfg.kx = v;
            }
            if let Some(v) = parse_from(&map, "walls")? {
                cfg.walls = v;
            }
            if let Some(v) = parse_from(&map, "jmode")? {
                cfg.jmode = v;
            }
            if let Some(v) = parse_from(&map, "mx_max")? {
                cfg.mx_max = v;
            }
            if let Some(v) = parse_from(&map, "c_max")? {
                cfg.c_max = Some(v);
            }
            if let Some(v) = parse_from(&map, "dt")? {
                cfg.dt = v;
            }
            if let Some(v) = parse_from(&map, "t_end")? {
                cfg.t_end = v;
            }
            if let Some(v) = parse_from(&map, "steady_tol")? {
                cfg.steady_tol = v;
            }
            if let Some(v) = parse_from(&map, "snapshot_every")? {
                cfg.snapshot_every = v;
            }
            if let Some(v) = parse_from(&map, "seed")? {
                cfg.seed = v;
            }
            if let Some(v) = parse_from(&map, "theta")? {
                cfg.theta = v;
            }
            if let Some(v) = parse_from(&map, "order")? {
                cfg.order = v;
            }
            if let Some(v) = parse_from(&map, "runs")? {
                cfg.runs = v;
            }
            if let Some(v) = parse_from(&map, "perturb_scale")? {
                cfg.perturb_scale = v;
            }
            if let Some(v) = map.get("reynolds_grid") {
                cfg.reynolds_grid = Some(parse_grid(v)?);
            }
            if let Some(v) = map.get("kx_grid") {
                cfg.kx_grid = Some(parse_grid(v)?);
            }
            if let Some(v) = parse_from(&map, "nx")? {
                cfg.nx = Some(v);
            }
            if let Some(v) = parse_from(&map, "ny")? {
                cfg.ny = Some(v);
            }
            if let Some(v) = map.get("format") {
                cfg.format = match v.as_str() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => {
                        return Err(validation(format!(
                            "format must be csv|json, got '{other}'"
                        )))
                    }
                };
            }
            if let Some(v) = map.get("source") {
                cfg.source = v.clone();
            }
        }

        macro_rules! flag {
            ($field:ident) => {
                if let Some(v) = cli.$field {
                    cfg.$field = v;
                }
            };
        }
        if let Some(v) = &cli.out {
            cfg.out_dir = v.clone();
        }
        flag!(lambda);
        flag!(reynolds);
        flag!(kx);
        flag!(walls);
        flag!(jmode);
        flag!(mx_max);
        flag!(dt);
        flag!(t_end);
        flag!(steady_tol);
        flag!(snapshot_every);
        flag!(seed);
        flag!(theta);
        flag!(order);
        flag!(runs);
        flag!(perturb_scale);
        if let Some(v) = cli.c_max {
            cfg.c_max = Some(v);
        }
        if let Some(v) = &cli.reynolds_grid {
            cfg.reynolds_grid = Some(parse_grid(v)?);
        }
        if let Some(v) = &cli.kx_grid {
            cfg.kx_grid = Some(parse_grid(v)?);
        }
        if let Some(v) = cli.nx {
            cfg.nx = Some(v);
        }
        if let Some(v) = cli.ny {
            cfg.ny = Some(v);
        }
        if let Some(v) = cli.format {
            cfg.format = v;
        }
        if let Some(v) = &cli.source {
            cfg.source = v.clone();
        }

        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(validation("lambda must be finite and >= 0"));
        }
        if !(self.reynolds > 0.0 && self.reynolds.is_finite()) {
            return Err(validation("reynolds must be finite and > 0"));
        }
        if !(self.kx > 0.0 && self.kx.is_finite()) {
            return Err(validation("kx must be finite and > 0"));
        }
        if self.walls < 2 {
            return Err(validation("walls must be >= 2"));
        }
        if self.jmode == 0 || self.jmode >= self.walls {
            return Err(validation("jmode must satisfy 1 <= j <= walls-1"));
        }
        if self.mx_max < 2 {
            return Err(validation("mx_max must be >= 2"));
        }
        if let Some(c) = self.c_max {
            if c < 2 * self.walls {
                return Err(validation("c_max must be >= 2*walls"));
            }
        }
        if !(self.dt > 0.0) {
            return Err(validation("dt must be > 0"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(validation("t_end must be finite and > 0"));
        }
        if !(self.steady_tol > 0.0) {
            return Err(validation("steady_tol must be > 0"));
        }
        if !(self.snapshot_every > 0.0 && self.snapshot_every.is_finite()) {
            return Err(validation("snapshot_every must be finite and > 0"));
        }
        if !(1..=2).contains(&self.order) {
            return Err(validation("order must be 1 or 2"));
        }
        if self.runs < 2 {
            return Err(validation("runs must be >= 2"));
        }
        if !(self.perturb_scale >= 0.0 && self.perturb_scale.is_finite()) {
            return Err(validation("perturb_scale must be finite and >= 0"));
        }
        for grid in [&self.reynolds_grid, &self.kx_grid].into_iter().flatten() {
            if grid.is_empty() {
                continue;
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(validation("grids must be strictly ascending"));
            }
        }
        if let Some(nx) = self.nx {
            if nx < 2 {
                return Err(validation("nx must be >= 2"));
            }
        }
        if let Some(ny) = self.ny {
            if ny < 2 {
                return Err(validation("ny must be >= 2"));
            }
        }
        if !["basic", "eigen", "secondary"].contains(&self.source.as_str()) {
            return Err(validation("source must be basic|eigen|secondary"));
        }
        Ok(())
    }

    fn geometry(&self) -> Result<GeometryParams, CliError> {
        GeometryParams::new(self.kx, self.walls, self.jmode).map_err(|e| validation(e.to_string()))
    }

    fn physical(&self) -> Result<PhysicalParams, CliError> {
        PhysicalParams::new(self.lambda, self.reynolds).map_err(|e| validation(e.to_string()))
    }

    fn sim_config(&self) -> Result<SimConfig, CliError> {
        let mut sim = SimConfig::new(self.physical()?, self.geometry()?);
        sim.mx_max = self.mx_max;
        if let Some(c) = self.c_max {
            sim.c_max = c;
        }
        sim.dt = self.dt;
        sim.t_end = self.t_end;
        sim.steady_tol = self.steady_tol;
        sim.snapshot_every = self.snapshot_every;
        sim.seed = self.seed;
        Ok(sim)
    }

    /// Figure-style grid: three streamwise periods, duct-height y range.
    fn grid_shape(&self, geom: &GeometryParams) -> (usize, usize, (f64, f64)) {
        let nx = self.nx.unwrap_or(241);
        let ny = self.ny.unwrap_or(2 * geom.n_walls as usize * 30 + 1);
        let x_half = 3.0 * std::f64::consts::PI / geom.kx;
        (nx, ny, (-x_half, x_half))
    }
}

/// 17 significant digits; round-trip safe for f64.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Staged output files: written as `<name>.partial`, renamed into place only
/// when the whole subcommand succeeds.
struct OutputSet {
    dir: PathBuf,
    staged: Vec<(PathBuf, PathBuf)>,
}

impl OutputSet {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
        })
    }

    fn stage(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let final_path = self.dir.join(name);
        let partial = self.dir.join(format!("{name}.partial"));
        std::fs::write(&partial, contents)?;
        self.staged.push((partial, final_path));
        Ok(())
    }

    fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut done = Vec::new();
        for (partial, final_path) in self.staged {
            std::fs::rename(&partial, &final_path)?;
            done.push(final_path);
        }
        Ok(done)
    }
}

/// Tabular rows rendered as CSV or a JSON array of objects.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = String::new();
                let _ = writeln!(out, "{}", self.columns.join(","));
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(|&v| fmt_g17(v)).collect();
                    let _ = writeln!(out, "{}", line.join(","));
                }
                out
            }
            OutputFormat::Json => {
                let objects: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut map = serde_json::Map::new();
                        for (k, &v) in self.columns.iter().zip(row) {
                            let val = if v.is_nan() {
                                serde_json::Value::Null
                            } else {
                                serde_json::json!(v)
                            };
                            map.insert((*k).to_string(), val);
                        }
                        serde_json::Value::Object(map)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&objects).expect("json, no NaN");
                s.push('\n');
                s
            }
        }
    }

    fn file_name(&self, stem: &str, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => format!("{stem}.csv"),
            OutputFormat::Json => format!("{stem}.json"),
        }
    }
}

fn field_table(field: &SpectralField, nx: usize, ny: usize, x_range: (f64, f64)) -> Table {
    let grid = sample_grid(field, nx, ny, x_range);
    let mut table = Table::new(vec!["x", "y", "psi"]);
    for (iy, &y) in grid.ys.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            table.push(vec![x, y, grid.values[iy * grid.xs.len() + ix]]);
        }
    }
    table
}

fn cmd_sigma_curve(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CliError> {
    let geom = cfg.geometry()?;
    let grid = cfg
        .reynolds_grid
        .clone()
        .unwrap_or_else(|| vec![cfg.reynolds]);
    let mut table = Table::new(vec!["R", "sigma", "residual"]);
    let mut any_failed = false;
    for &r in &grid {
        match PhysicalParams::new(cfg.lambda, r)
            .map_err(|e| e.to_string())
            .and_then(|phys| linstab::sigma_of_r(&phys, &geom).map_err(|e| e.to_string()))
        {
            Ok(eig) => table.push(vec![r, eig.sigma, eig.dispersion_residual]),
            Err(msg) => {
                eprintln!("sigma-curve: R = {r}: {msg}");
                any_failed = true;
                table.push(vec![r, f64::NAN, f64::NAN]);
            }
        }
    }
    let mut out = OutputSet::new(&cfg.out_dir)?;
    out.stage(
        &table.file_name("sigma_curve", cfg.format),
        &table.render(cfg.format),
    )?;
    Ok((out.commit()?, any_failed))
}

#[derive(Serialize)]
struct NeutralMinimum {
    kx: f64,
    critical_reynolds: f64,
}

fn cmd_neutral_curve(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CliError> {
    let grid = cfg
        .kx_grid
        .clone()
        .ok_or_else(|| validation("neutral-curve needs kx_grid"))?;
    let curve =
        linstab::neutral_curve(cfg.lambda, cfg.walls, cfg.jmode, &grid).map_err(numerical)?;
    let mut table = Table::new(vec!["k_x", "R_c"]);
    let mut any_failed = false;
    for point in &curve.points {
        match &point.critical_reynolds {
            Ok(rc) => table.push(vec![point.kx, *rc]),
            Err(msg) => {
                eprintln!("neutral-curve: kx = {}: {msg}", point.kx);
                any_failed = true;
                table.push(vec![point.kx, f64::NAN]);
            }
        }
    }
    let mut out = OutputSet::new(&cfg.out_dir)?;
    out.stage(
        &table.file_name("neutral", cfg.format),
        &table.render(cfg.format),
    )?;
    if let Some((kx, rc)) = curve.minimum {
        let sidecar = NeutralMinimum {
            kx,
            critical_reynolds: rc,
        };
        let mut text = serde_json::to_string_pretty(&sidecar).expect("json");
        text.push('\n');
        out.stage("neutral_min.json", &text)?;
    }
    Ok((out.commit()?, any_failed))
}

fn cmd_eigenfunction(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CliError> {
    let geom = cfg.geometry()?;
    let phys = cfg.physical()?;
    let eig = linstab::sigma_of_r(&phys, &geom).map_err(numerical)?;
    let mut table = Table::new(vec!["n", "phi", "phi_star"]);
    for n in -eig.half_width()..=eig.half_width() {
        table.push(vec![n as f64, eig.phi(n), eig.phi_star(n)]);
    }
    let fields = eigenfields(&eig, 1, 1);
    let (nx, ny, x_range) = cfg.grid_shape(&geom);
    let field = field_table(&fields.psi1, nx, ny, x_range);

    let mut out = OutputSet::new(&cfg.out_dir)?;
    out.stage(
        &table.file_name("eigen", cfg.format),
        &table.render(cfg.format),
    )?;
    out.stage(
        &field.file_name("eigen_field", cfg.format),
        &field.render(cfg.format),
    )?;
    Ok((out.commit()?, false))
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct LandauReport {
    R_c: f64,
    a: f64,
    b: f64,
    a_plus_b: f64,
    mu_at_R: f64,
    epsilon_at_R: Option<f64>,
    resonance_warnings: Vec<String>,
}

fn cmd_landau(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CliError> {
    let geom = cfg.geometry()?;
    let analysis = BifurcationAnalysis::new(cfg.lambda, geom).map_err(numerical)?;
    let mu = analysis.mu(cfg.reynolds).map_err(numerical)?;
    let epsilon = match analysis.predicted_amplitude(cfg.reynolds) {
        Ok(eps) => Some(eps),
        Err(BifurcationError::NoSteadyBranch { .. }) => None,
        Err(e) => return Err(numerical(e)),
    };
    let report = LandauReport {
        R_c: analysis.critical_reynolds,
        a: analysis.a_coef,
        b: analysis.b_coef,
        a_plus_b: analysis.landau(),
        mu_at_R: mu,
        epsilon_at_R: epsilon,
        resonance_warnings: analysis.resonance_warnings.clone(),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("json");
    text.push('\n');
    let mut out = OutputSet::new(&cfg.out_dir)?;
    out.stage("landau.json", &text)?;
    Ok((out.commit()?, false))
}

#[derive(Serialize)]
struct SecondaryReport {
    reynolds: f64,
    mu: f64,
    amplitude: f64,
    theta: f64,
    order: u8,
    amplitude_warning: bool,
}

fn correction_order(order: u8) -> CorrectionOrder {
    if order == 1 {
        CorrectionOrder::Linear
    } else {
        CorrectionOrder::Quadratic
    }
}

fn cmd_secondary(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CliError> {
    let geom = cfg.geometry()?;
    let analysis = BifurcationAnalysis::new(cfg.lambda, geom).map_err(numerical)?;
    let spec = analysis
        .secondary_flow(cfg.reynolds, cfg.theta, correction_order(cfg.order))
        .map_err(numerical)?;
    if spec.amplitude_warning {
        eprintln!(
            "secondary: amplitude {:.3e} leaves the local expansion ball; field is advisory",
            spec.amplitude
        );
    }
    let (nx, ny, x_range) = cfg.grid_shape(&geom);
    let field = field_table(&spec.field, nx, ny, x_range);
    let report = SecondaryReport {
        reynolds: spec.reynolds,
        mu: spec.mu,
        amplitude: spec.amplitude,
        theta: spec.theta,
        order: cfg.order,
        amplitude_warning: spec.amplitude_warning,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("json");
    text.push('\n');
    let mut out = OutputSet::new(&cfg.out_dir)?;
    out.stage(
        &field.file_name("field", cfg.format),
        &field.render(cfg.format),
    )?;
    out.stage("secondary.json", &text)?;
    Ok((out.commit()?, false))
}

fn cmd_simulate(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CliError> {
    let sim_config = cfg.sim_config()?;
    let sim = Simulation::new(sim_config).map_err(numerical)?;
    let initial = perturbed_basic_state(&sim_config, cfg.perturb_scale, cfg.seed);
    let mut table = Table::new(vec!["t", "E_total", "E_pert", "amp_m1", "residual"]);
    let phys = sim_config.phys;
    let (final_state, converged) = sim
        .run_with_snapshots(initial, |state| {
            table.push(vec![
                state.t,
                energy_total(&state.field),
                energy_perturbation(&phys, &state.field),
                state.field.block_coeff_norm(1),
                state.residual,
            ]);
        })
        .map_err(numerical)?;
    let geom = cfg.geometry()?;
    let (nx, ny, x_range) = cfg.grid_shape(&geom);
    let field = field_table(&final_state.field, nx, ny, x_range);
    println!(
        "simulate: t = {:.3}, converged = {converged}, residual = {:.3e}",
        final_state.t, final_state.residual
    );
    let mut out = OutputSet::new(&cfg.out_dir)?;
    out.stage(
        &table.file_name("timeseries", cfg.format),
        &table.render(cfg.format),
    )?;
    out.stage(
        &field.file_name("field", cfg.format),
        &field.render(cfg.format),
    )?;
    Ok((out.commit()?, false))
}

fn cmd_field(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CliError> {
    let geom = cfg.geometry()?;
    let field = match cfg.source.as_str() {
        "basic" => SpectralField::basic_flow(geom, cfg.lambda, 2, geom.denom()),
        "eigen" => {
            let eig = linstab::sigma_of_r(&cfg.physical()?, &geom).map_err(numerical)?;
            eigenfields(&eig, 1, 1).psi_theta(cfg.theta)
        }
        "secondary" => {
            let analysis = BifurcationAnalysis::new(cfg.lambda, geom).map_err(numerical)?;
            analysis
                .secondary_flow(cfg.reynolds, cfg.theta, correction_order(cfg.order))
                .map_err(numerical)?
                .field
        }
        other => return Err(validation(format!("unknown field source '{other}'"))),
    };
    let (nx, ny, x_range) = cfg.grid_shape(&geom);
    let table = field_table(&field, nx, ny, x_range);
    let mut out = OutputSet::new(&cfg.out_dir)?;
    out.stage(
        &table.file_name("field", cfg.format),
        &table.render(cfg.format),
    )?;
    Ok((out.commit()?, false))
}

#[derive(Serialize)]
struct SensitivitySummary {
    n_runs: usize,
    perturb_scale: f64,
    max_end_distance: f64,
    blew_up: Vec<bool>,
    end_energy_by_block: Vec<Vec<(i64, f64)>>,
}

fn cmd_sensitivity(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CliError> {
    let sim_config = cfg.sim_config()?;
    let report = sensitivity_run(&sim_config, cfg.runs, cfg.perturb_scale).map_err(numerical)?;
    let mut table = Table::new(vec!["t", "run_i", "run_j", "distance"]);
    for (k, &t) in report.times.iter().enumerate() {
        for ((i, j), series) in &report.pair_distances {
            table.push(vec![t, *i as f64, *j as f64, series[k]]);
        }
    }
    let summary = SensitivitySummary {
        n_runs: cfg.runs,
        perturb_scale: cfg.perturb_scale,
        max_end_distance: report.max_end_distance(),
        blew_up: report.outcomes.iter().map(|o| o.blew_up).collect(),
        end_energy_by_block: report.end_fields.iter().map(energy_by_block).collect(),
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("json");
    text.push('\n');
    let any_failed = report.outcomes.iter().any(|o| o.blew_up);
    let mut out = OutputSet::new(&cfg.out_dir)?;
    out.stage(
        &table.file_name("sensitivity", cfg.format),
        &table.render(cfg.format),
    )?;
    out.stage("sensitivity_summary.json", &text)?;
    Ok((out.commit()?, any_failed))
}

/// Parses `args` and runs the subcommand; returns the process exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::SigmaCurve => cmd_sigma_curve(&cfg),
        Command::NeutralCurve => cmd_neutral_curve(&cfg),
        Command::Eigenfunction => cmd_eigenfunction(&cfg),
        Command::Landau => cmd_landau(&cfg),
        Command::Secondary => cmd_secondary(&cfg),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Field => cmd_field(&cfg),
        Command::Sensitivity => cmd_sensitivity(&cfg),
    };
    match result {
        Ok((files, any_failed)) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            if any_failed {
                eprintln!("completed with per-point failures");
                3
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the thin binary.
pub fn run() -> i32 {
    run_with_args(std::env::args_os())
}
