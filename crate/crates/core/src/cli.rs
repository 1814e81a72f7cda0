//! Command-line front end.
//!
//! Data files contain no wall-clock information, so identical settings give
//! byte-identical output; when `--out` is given a `<out>.meta.json` sidecar
//! records the schema, settings and a timestamp.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::densities::{SystemKind, SystemSpec};
use crate::error::{Error, Result};
use crate::ho_basis::Nucleus;
use crate::infotheory::{analyze, fit_scaling_law, Analysis, ScalingFit, WoottersComponent};
use crate::jastrow::{default_grid, CorrelationParam};
use crate::observables::{default_k_grid, momentum_profile, observables, ObservableSet};
use crate::quadrature::QuadratureSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const SWEEP_SCHEMA: &str = "corrinfo-sweep/1";
pub const SWEEP_COLUMNS: [&str; 20] = [
    "system",
    "ln_inv_y",
    "S1r",
    "S1k",
    "S1",
    "S2r",
    "S2k",
    "S2",
    "O1",
    "O2",
    "K1r",
    "K1k",
    "K2r",
    "K2k",
    "J1r",
    "J1k",
    "L_min",
    "rms_r",
    "T_mean",
    "clamped_mass",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "corrinfo", version, about = "Information entropies of correlated nuclei and trapped Bose gases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Systems, comma separated: He4, C12, O16, Ca40, Bose.
    #[arg(long, global = true, value_delimiter = ',')]
    pub system: Option<Vec<String>>,

    /// Correlation strengths ln(1/y), comma separated; -inf means uncorrelated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,

    /// Oscillator length b.
    #[arg(long, global = true)]
    pub b: Option<f64>,

    #[arg(long, global = true)]
    pub radial_order: Option<usize>,

    #[arg(long, global = true)]
    pub angular_order: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Flat JSON config file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Jensen-Shannon component for the Wootters trial count (J1r, J1k, J2r, J2k).
    #[arg(long, global = true)]
    pub wootters: Option<String>,

    /// Print which command and columns reproduce each table and figure.
    #[arg(long)]
    pub list_datasets: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Uncorrelated S1, S2, O1, √O2 of the four nuclei against published values.
    Table1,
    /// All functionals along a grid of correlation strengths.
    Sweep,
    /// One-body momentum distributions with the mean-field reference.
    Momdist,
    /// Fit S1 = a + b ln A over the four nuclei.
    FitScaling,
    /// Kullback-Leibler and Jensen-Shannon divergences along the grid.
    Divergence,
}

/// Settings shared by all commands; every key is optional in the JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub systems: Option<Vec<String>>,
    pub grid: Option<Vec<f64>>,
    pub b: f64,
    pub radial_order: usize,
    pub angular_order: usize,
    pub tolerance: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// 0 lets the thread pool pick.
    pub jobs: usize,
    pub wootters: String,
    /// Prepend an uncorrelated row to every system in `sweep`.
    pub include_uncorrelated: bool,
    pub k_grid: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        RunConfig {
            systems: None,
            grid: None,
            b: 1.0,
            radial_order: q.radial_order,
            angular_order: q.angular_order,
            tolerance: q.tolerance,
            format: OutputFormat::Csv,
            out: None,
            jobs: 0,
            wootters: "J1r".into(),
            include_uncorrelated: true,
            k_grid: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) overridden by explicit flags.
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(p) => Self::from_json_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = &cli.system {
            cfg.systems = Some(s.clone());
        }
        if let Some(g) = &cli.grid {
            cfg.grid = Some(g.clone());
        }
        if let Some(b) = cli.b {
            cfg.b = b;
        }
        if let Some(n) = cli.radial_order {
            cfg.radial_order = n;
        }
        if let Some(n) = cli.angular_order {
            cfg.angular_order = n;
        }
        if let Some(f) = cli.format {
            cfg.format = f;
        }
        if let Some(o) = &cli.out {
            cfg.out = Some(o.clone());
        }
        if let Some(j) = cli.jobs {
            cfg.jobs = j;
        }
        if let Some(w) = &cli.wootters {
            cfg.wootters = w.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.quadrature().validate()?;
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Config(format!("b must be positive, got {}", self.b)));
        }
        self.wootters_component()?;
        if let Some(g) = &self.grid {
            if let Some(bad) = g.iter().find(|v| v.is_nan() || **v == f64::INFINITY) {
                return Err(Error::Config(format!("invalid grid value {bad}")));
            }
        }
        self.system_kinds(&[])?;
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            radial_order: self.radial_order,
            angular_order: self.angular_order,
            tolerance: self.tolerance,
            ..QuadratureSpec::default()
        }
    }

    pub fn wootters_component(&self) -> Result<WoottersComponent> {
        self.wootters.parse()
    }

    pub fn system_kinds(&self, default: &[SystemKind]) -> Result<Vec<SystemKind>> {
        match &self.systems {
            Some(list) => list.iter().map(|s| s.trim().parse()).collect(),
            None => Ok(default.to_vec()),
        }
    }

    /// The `ln(1/y)` grid, warning about values where the lowest-order expansion breaks down.
    pub fn strength_grid(&self, default: &[f64]) -> Vec<f64> {
        let grid = self.grid.clone().unwrap_or_else(|| default.to_vec());
        for &v in grid.iter().filter(|v| **v > 0.0) {
            log::warn!("ln(1/y) = {v} > 0 lies beyond the validity of the lowest-order approximation");
        }
        grid
    }

    fn spec_for(&self, kind: SystemKind, ln_inv_y: f64) -> Result<SystemSpec> {
        SystemSpec::new(kind, self.b, CorrelationParam::from_ln_inv_y(ln_inv_y)?)
    }
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(fmt_f64(x))
    }
}

/// One line of the `sweep` output.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub system: String,
    pub ln_inv_y: f64,
    pub analysis: Analysis,
    pub observables: ObservableSet,
}

impl SweepRow {
    pub fn compute(kind: SystemKind, ln_inv_y: f64, cfg: &RunConfig) -> Result<Self> {
        let sys = cfg.spec_for(kind, ln_inv_y)?;
        let q = cfg.quadrature();
        Ok(SweepRow {
            system: kind.label().to_string(),
            ln_inv_y,
            analysis: analyze(&sys, &q, cfg.wootters_component()?)?,
            observables: observables(&sys, &q)?,
        })
    }

    /// Values in [`SWEEP_COLUMNS`] order; `L_min` is `None` when undefined.
    pub fn numbers(&self) -> Vec<Option<f64>> {
        let e = &self.analysis.entropy;
        let d = &self.analysis.divergence;
        vec![
            Some(self.ln_inv_y),
            Some(e.s1r),
            Some(e.s1k),
            Some(e.s1),
            Some(e.s2r),
            Some(e.s2k),
            Some(e.s2),
            Some(e.o1),
            Some(e.o2),
            Some(d.k1r),
            Some(d.k1k),
            Some(d.k2r),
            Some(d.k2k),
            Some(d.j1r),
            Some(d.j1k),
            d.l_min.map(|l| l as f64),
            Some(self.observables.rms_radius),
            Some(self.observables.kinetic_energy),
            Some(self.analysis.clamp.max()),
        ]
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let mut out = vec![self.system.clone()];
        out.extend(self.numbers().into_iter().enumerate().map(|(i, v)| match v {
            // L_min is an integer
            Some(x) if SWEEP_COLUMNS[i + 1] == "L_min" => format!("{}", x as u64),
            Some(x) => fmt_f64(x),
            None => "NA".into(),
        }));
        out
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("system".into(), Value::String(self.system.clone()));
        for (name, v) in SWEEP_COLUMNS[1..].iter().zip(self.numbers()) {
            let val = match (name, v) {
                (&"L_min", Some(x)) => json!(x as u64),
                (_, Some(x)) => json_f64(x),
                (_, None) => Value::Null,
            };
            m.insert((*name).into(), val);
        }
        Value::Object(m)
    }
}

/// `k` column, mean-field column and one column per correlation strength.
#[derive(Debug, Clone, PartialEq)]
pub struct MomdistTable {
    pub k: Vec<f64>,
    pub mf: Vec<f64>,
    pub columns: Vec<(f64, Vec<f64>)>,
}

impl MomdistTable {
    pub fn compute(kind: SystemKind, grid: &[f64], ks: &[f64], b: f64) -> Result<Self> {
        let mut mf = Vec::new();
        let mut columns = Vec::new();
        for &l in grid {
            let sys = SystemSpec::new(kind, b, CorrelationParam::from_ln_inv_y(l)?)?;
            let prof = momentum_profile(&sys, ks)?;
            mf = prof.mf;
            columns.push((l, prof.n));
        }
        if grid.is_empty() {
            let sys = SystemSpec::new(kind, b, CorrelationParam::Uncorrelated)?;
            mf = momentum_profile(&sys, ks)?.mf;
        }
        Ok(MomdistTable {
            k: ks.to_vec(),
            mf,
            columns,
        })
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["k".to_string(), "MF".to_string()];
        h.extend(self.columns.iter().map(|(l, _)| format!("ln_inv_y={}", fmt_f64(*l))));
        h
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.header().join(","));
        s.push('\n');
        for i in 0..self.k.len() {
            let mut fields = vec![fmt_f64(self.k[i]), fmt_f64(self.mf[i])];
            fields.extend(self.columns.iter().map(|(_, c)| fmt_f64(c[i])));
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        if header.len() < 2 || &header[0] != "k" || &header[1] != "MF" {
            return Err(Error::Config("momentum table must start with columns k,MF".into()));
        }
        let strengths = header
            .iter()
            .skip(2)
            .map(|h| {
                h.strip_prefix("ln_inv_y=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("bad column header {h:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut table = MomdistTable {
            k: Vec::new(),
            mf: Vec::new(),
            columns: strengths.into_iter().map(|l| (l, Vec::new())).collect(),
        };
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| Error::Config(format!("bad number {v:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            table.k.push(vals[0]);
            table.mf.push(vals[1]);
            for (col, v) in table.columns.iter_mut().zip(&vals[2..]) {
                col.1.push(*v);
            }
        }
        Ok(table)
    }

    pub fn to_json(&self) -> Value {
        let mut cols = Map::new();
        for (l, c) in &self.columns {
            cols.insert(format!("ln_inv_y={}", fmt_f64(*l)), c.iter().map(|&x| json_f64(x)).collect());
        }
        json!({
            "k": self.k.iter().map(|&x| json_f64(x)).collect::<Vec<_>>(),
            "MF": self.mf.iter().map(|&x| json_f64(x)).collect::<Vec<_>>(),
            "columns": cols,
        })
    }
}

/// Published uncorrelated values: (S1, S2, O1, √O2).
pub fn table1_reference(n: Nucleus) -> (f64, f64, f64, f64) {
    match n {
        Nucleus::He4 => (6.43418, 12.86836, 248.05, 248.05),
        Nucleus::C12 => (7.50858, 15.00784, 922.60, 921.15),
        Nucleus::O16 => (7.60692, 15.20890, 1057.25, 1055.77),
        Nucleus::Ca40 => (8.43472, 16.88498, 2685.72, 2711.75),
    }
}

pub const TABLE1_TOL_S: f64 = 1e-3;
pub const TABLE1_TOL_O: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub nucleus: Nucleus,
    pub s1: f64,
    pub s2: f64,
    pub o1: f64,
    pub sqrt_o2: f64,
    pub published: (f64, f64, f64, f64),
}

impl Table1Row {
    pub fn from_analysis(nucleus: Nucleus, a: &Analysis) -> Self {
        let e = &a.entropy;
        Table1Row {
            nucleus,
            s1: e.s1,
            s2: e.s2,
            o1: e.o1,
            sqrt_o2: e.o2.sqrt(),
            published: table1_reference(nucleus),
        }
    }

    /// Relative deviations from the published values.
    pub fn deviations(&self) -> [f64; 4] {
        let p = self.published;
        [
            (self.s1 - p.0) / p.0,
            (self.s2 - p.1) / p.1,
            (self.o1 - p.2) / p.2,
            (self.sqrt_o2 - p.3) / p.3,
        ]
    }

    pub fn within_tolerance(&self) -> bool {
        let d = self.deviations();
        d[0].abs() <= TABLE1_TOL_S && d[1].abs() <= TABLE1_TOL_S && d[2].abs() <= TABLE1_TOL_O && d[3].abs() <= TABLE1_TOL_O
    }
}

pub const DATASETS: &[(&str, &str, &str, &str)] = &[
    ("Table 1", "table1", "He4,C12,O16,Ca40", "S1,S2,O1,sqrtO2"),
    ("Fig. 1", "sweep", "C12,Bose", "S1,S2"),
    ("Fig. 2", "sweep", "O16,Bose", "S1r,S1k,S2r,S2k"),
    ("Fig. 3", "sweep", "C12,Ca40,Bose", "O1,O2"),
    ("Fig. 4", "sweep", "O16,Bose", "rms_r,S1r"),
    ("Fig. 5", "sweep", "O16,Bose", "T_mean,S1k"),
    ("Fig. 6", "divergence", "He4,O16,Ca40", "K1r,K1k"),
    ("Fig. 7", "divergence", "He4,O16,Ca40", "K2r,K2k"),
    ("Fig. 8", "divergence", "He4,O16,Ca40,Bose", "J1r,J1k"),
    ("Fig. 9", "momdist", "He4", "k,MF,ln_inv_y=-3,ln_inv_y=-2,ln_inv_y=-1,ln_inv_y=0"),
];

pub fn list_datasets() -> String {
    let mut s = String::from("dataset,command,systems,columns\n");
    for (fig, cmd, sys, cols) in DATASETS {
        let _ = writeln!(s, "{fig},{cmd},\"{sys}\",\"{cols}\"");
    }
    s
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::UnknownNucleus(_)
        | Error::InvalidCorrelation(_)
        | Error::InvalidQuadrature(_)
        | Error::InvalidShell(_)
        | Error::UnsupportedOrbital { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => EXIT_CONFIG,
        Error::NonFinite { .. } | Error::Domain { .. } | Error::Indistinguishable(_) | Error::DegenerateFit(_) => {
            EXIT_NUMERICAL
        }
    }
}

fn build_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Evaluate `f` over `tasks` on the pool; results keep the task order.
fn run_parallel<T: Sync, R: Send>(cfg: &RunConfig, tasks: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>> {
    let pool = build_pool(cfg.jobs)?;
    Ok(pool.install(|| tasks.par_iter().map(&f).collect()))
}

fn sweep_tasks(cfg: &RunConfig, default_systems: &[SystemKind]) -> Result<Vec<(SystemKind, f64)>> {
    let systems = cfg.system_kinds(default_systems)?;
    let grid = cfg.strength_grid(&default_grid());
    let mut tasks = Vec::new();
    for kind in systems {
        if cfg.include_uncorrelated && !grid.contains(&f64::NEG_INFINITY) {
            tasks.push((kind, f64::NEG_INFINITY));
        }
        tasks.extend(grid.iter().map(|&l| (kind, l)));
    }
    Ok(tasks)
}

/// Rows in task order; failed rows are logged and counted.
pub fn compute_sweep(cfg: &RunConfig) -> Result<(Vec<SweepRow>, usize)> {
    let tasks = sweep_tasks(cfg, &SystemKind::ALL)?;
    let results = run_parallel(cfg, &tasks, |&(kind, l)| SweepRow::compute(kind, l, cfg))?;
    let mut rows = Vec::new();
    let mut failed = 0;
    for ((kind, l), r) in tasks.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failed += 1;
                log::error!("{kind} at ln(1/y)={l}: {e}");
            }
        }
    }
    Ok((rows, failed))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("# schema: {SWEEP_SCHEMA}\n{}\n", SWEEP_COLUMNS.join(","));
    for r in rows {
        s.push_str(&r.csv_fields().join(","));
        s.push('\n');
    }
    s
}

pub fn sweep_json(rows: &[SweepRow]) -> Value {
    json!({
        "schema": SWEEP_SCHEMA,
        "rows": rows.iter().map(SweepRow::to_json).collect::<Vec<_>>(),
    })
}

pub const DIVERGENCE_COLUMNS: [&str; 11] =
    ["system", "ln_inv_y", "K1r", "K1k", "K2r", "K2k", "J1r", "J1k", "J2r", "J2k", "L_min"];

fn divergence_fields(row: &SweepRow) -> Vec<(String, Option<f64>)> {
    let d = &row.analysis.divergence;
    let vals = [
        Some(row.ln_inv_y),
        Some(d.k1r),
        Some(d.k1k),
        Some(d.k2r),
        Some(d.k2k),
        Some(d.j1r),
        Some(d.j1k),
        Some(d.j2r),
        Some(d.j2k),
        d.l_min.map(|l| l as f64),
    ];
    DIVERGENCE_COLUMNS[1..].iter().map(|c| c.to_string()).zip(vals).collect()
}

pub fn divergence_output(rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut s = format!("{}\n", DIVERGENCE_COLUMNS.join(","));
            for r in rows {
                let mut fields = vec![r.system.clone()];
                fields.extend(divergence_fields(r).into_iter().map(|(name, v)| match v {
                    Some(x) if name == "L_min" => format!("{}", x as u64),
                    Some(x) => fmt_f64(x),
                    None => "NA".into(),
                }));
                s.push_str(&fields.join(","));
                s.push('\n');
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    m.insert("system".into(), Value::String(r.system.clone()));
                    for (name, v) in divergence_fields(r) {
                        let val = match v {
                            Some(x) if name == "L_min" => json!(x as u64),
                            Some(x) => json_f64(x),
                            None => Value::Null,
                        };
                        m.insert(name, val);
                    }
                    Value::Object(m)
                })
                .collect();
            pretty(&json!({ "rows": rows }))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn table1_rows(cfg: &RunConfig) -> Result<Vec<Table1Row>> {
    let q = cfg.quadrature();
    let wootters = cfg.wootters_component()?;
    let results = run_parallel(cfg, &Nucleus::ALL, |&n| {
        let sys = SystemSpec::new(SystemKind::Nucleus(n), cfg.b, CorrelationParam::Uncorrelated)?;
        analyze(&sys, &q, wootters).map(|a| Table1Row::from_analysis(n, &a))
    })?;
    results.into_iter().collect()
}

pub fn table1_output(rows: &[Table1Row], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut s = String::from(
                "nucleus,S1,S2,O1,sqrtO2,published_S1,published_S2,published_O1,published_sqrtO2,dev_S1,dev_S2,dev_O1,dev_sqrtO2,pass\n",
            );
            for r in rows {
                let d = r.deviations();
                let p = r.published;
                let nums = [r.s1, r.s2, r.o1, r.sqrt_o2, p.0, p.1, p.2, p.3, d[0], d[1], d[2], d[3]];
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    r.nucleus,
                    nums.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(","),
                    r.within_tolerance()
                );
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let d = r.deviations();
                    json!({
                        "nucleus": r.nucleus.label(),
                        "S1": r.s1, "S2": r.s2, "O1": r.o1, "sqrtO2": r.sqrt_o2,
                        "published_S1": r.published.0, "published_S2": r.published.1,
                        "published_O1": r.published.2, "published_sqrtO2": r.published.3,
                        "dev_S1": d[0], "dev_S2": d[1], "dev_O1": d[2], "dev_sqrtO2": d[3],
                        "pass": r.within_tolerance(),
                    })
                })
                .collect();
            pretty(&json!({ "rows": rows }))
        }
    }
}

pub fn fit_rows(cfg: &RunConfig) -> Result<(Vec<(Nucleus, f64)>, ScalingFit)> {
    let rows = table1_rows(cfg)?;
    let pts: Vec<(Nucleus, f64)> = rows.iter().map(|r| (r.nucleus, r.s1)).collect();
    let fit = fit_scaling_law(
        &pts
            .iter()
            .map(|(n, s)| (n.mass_number() as f64, *s))
            .collect::<Vec<_>>(),
    )?;
    Ok((pts, fit))
}

pub fn fit_output(pts: &[(Nucleus, f64)], fit: &ScalingFit, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut s = String::from("system,N,S1,S1_fit,residual,a,b\n");
            for ((n, s1), res) in pts.iter().zip(&fit.residuals) {
                let a = n.mass_number() as f64;
                let _ = writeln!(
                    s,
                    "{n},{},{},{},{},{},{}",
                    n.mass_number(),
                    fmt_f64(*s1),
                    fmt_f64(fit.predict(a)),
                    fmt_f64(*res),
                    fmt_f64(fit.a),
                    fmt_f64(fit.b)
                );
            }
            s
        }
        OutputFormat::Json => pretty(&json!({
            "a": fit.a,
            "b": fit.b,
            "rms_residual": fit.rms_residual(),
            "points": pts.iter().zip(&fit.residuals).map(|((n, s1), r)| json!({
                "system": n.label(), "N": n.mass_number(), "S1": s1, "residual": r,
            })).collect::<Vec<_>>(),
        })),
    }
}

fn emit(cfg: &RunConfig, command: &str, body: &str, out: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, body)?;
            let stamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let meta = json!({
                "command": command,
                "schema": if command == "sweep" { SWEEP_SCHEMA } else { command },
                "version": env!("CARGO_PKG_VERSION"),
                "created_unix": stamp,
                "config": cfg,
            });
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta.json");
            std::fs::write(PathBuf::from(meta_path), pretty(&meta))?;
            Ok(())
        }
        None => {
            out.write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn execute(command: Command, cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Table1 => {
            let rows = table1_rows(cfg)?;
            let mut code = EXIT_OK;
            for r in &rows {
                if !r.within_tolerance() {
                    let d = r.deviations();
                    log::error!(
                        "{}: deviation from published values S1 {:+.3e}, S2 {:+.3e}, O1 {:+.3e}, √O2 {:+.3e}",
                        r.nucleus,
                        d[0],
                        d[1],
                        d[2],
                        d[3]
                    );
                    code = EXIT_TOLERANCE;
                }
            }
            emit(cfg, "table1", &table1_output(&rows, cfg.format), out)?;
            Ok(code)
        }
        Command::Sweep => {
            let (rows, failed) = compute_sweep(cfg)?;
            let body = match cfg.format {
                OutputFormat::Csv => sweep_csv(&rows),
                OutputFormat::Json => pretty(&sweep_json(&rows)),
            };
            emit(cfg, "sweep", &body, out)?;
            Ok(if failed > 0 { EXIT_NUMERICAL } else { EXIT_OK })
        }
        Command::Divergence => {
            let defaults = [
                SystemKind::Nucleus(Nucleus::He4),
                SystemKind::Nucleus(Nucleus::O16),
                SystemKind::Nucleus(Nucleus::Ca40),
                SystemKind::BoseGas,
            ];
            let div_cfg = RunConfig {
                systems: Some(
                    cfg.system_kinds(&defaults)?
                        .iter()
                        .map(|k| k.label().to_string())
                        .collect(),
                ),
                include_uncorrelated: false,
                ..cfg.clone()
            };
            let (rows, failed) = compute_sweep(&div_cfg)?;
            emit(cfg, "divergence", &divergence_output(&rows, cfg.format), out)?;
            Ok(if failed > 0 { EXIT_NUMERICAL } else { EXIT_OK })
        }
        Command::Momdist => {
            let kinds = cfg.system_kinds(&[SystemKind::Nucleus(Nucleus::He4)])?;
            let grid = cfg.strength_grid(&[-3.0, -2.0, -1.0, 0.0]);
            let ks = cfg.k_grid.clone().unwrap_or_else(default_k_grid);
            let mut body = String::new();
            let mut json_tables = Map::new();
            for kind in &kinds {
                let t = MomdistTable::compute(*kind, &grid, &ks, cfg.b)?;
                if kinds.len() > 1 && cfg.format == OutputFormat::Csv {
                    let _ = writeln!(body, "# system: {kind}");
                }
                match cfg.format {
                    OutputFormat::Csv => body.push_str(&t.to_csv()),
                    OutputFormat::Json => {
                        json_tables.insert(kind.label().into(), t.to_json());
                    }
                }
            }
            if cfg.format == OutputFormat::Json {
                body = pretty(&Value::Object(json_tables));
            }
            emit(cfg, "momdist", &body, out)?;
            Ok(EXIT_OK)
        }
        Command::FitScaling => {
            let (pts, fit) = fit_rows(cfg)?;
            emit(cfg, "fit-scaling", &fit_output(&pts, &fit, cfg.format), out)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.list_datasets {
        return match out.write_all(list_datasets().as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(_) => EXIT_CONFIG,
        };
    }
    let Some(command) = cli.command else {
        eprintln!("no command given; see --help");
        return EXIT_CONFIG;
    };
    let result = RunConfig::from_cli(&cli).and_then(|cfg| execute(command, &cfg, out));
    match result {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point used by the binary.
pub fn main_with_stdout() -> i32 {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    run(std::env::args_os(), &mut lock)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let mut full = vec!["corrinfo"];
        full.extend_from_slice(args);
        let code = run(full, &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn list_datasets_covers_every_figure() {
        let (code, out) = run_capture(&["--list-datasets"]);
        assert_eq!(code, 0);
        for i in 1..=9 {
            assert!(out.contains(&format!("Fig. {i},")), "missing Fig. {i}");
        }
        assert!(out.contains("Table 1"));
    }

    #[test]
    fn config_errors_exit_3() {
        assert_eq!(run_capture(&["sweep", "--system", "Pb208"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["sweep", "--radial-order", "4"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["sweep", "--b", "-1"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["sweep", "--wootters", "J3"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&[]).0, EXIT_CONFIG);
    }

    #[test]
    fn config_file_and_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        std::fs::write(&p, r#"{"b": 2.0, "radial_order": 40, "systems": ["O16"]}"#).unwrap();
        let cli = Cli::try_parse_from(["corrinfo", "sweep", "--config", p.to_str().unwrap(), "--radial-order", "50"]).unwrap();
        let cfg = RunConfig::from_cli(&cli).unwrap();
        assert_eq!(cfg.b, 2.0);
        assert_eq!(cfg.radial_order, 50);
        assert_eq!(cfg.angular_order, 48);
        assert_eq!(cfg.systems, Some(vec!["O16".to_string()]));
        std::fs::write(&p, r#"{"bogus": 1}"#).unwrap();
        let cli = Cli::try_parse_from(["corrinfo", "sweep", "--config", p.to_str().unwrap()]).unwrap();
        assert!(matches!(RunConfig::from_cli(&cli), Err(Error::Config(_))));
    }

    #[test]
    fn negative_grid_values_parse() {
        let cli = Cli::try_parse_from(["corrinfo", "sweep", "--grid", "-4,-2.5,0,-inf"]).unwrap();
        let g = cli.grid.unwrap();
        assert_eq!(g[..3], [-4.0, -2.5, 0.0]);
        assert_eq!(g[3], f64::NEG_INFINITY);
    }

    #[test]
    fn momdist_round_trip() {
        let t = MomdistTable::compute(SystemKind::Nucleus(Nucleus::He4), &[-3.0, -2.0, -1.0, 0.0], &default_k_grid(), 1.0)
            .unwrap();
        let back = MomdistTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
        assert_eq!(t.header()[2], "ln_inv_y=-3");
    }

    #[test]
    fn fmt_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, f64::NEG_INFINITY, 6.434189657547] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
