use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Experiment, RunConfig};
use crate::error::Result;

/// Version of the JSON layouts written by the lab.
pub const SCHEMA_VERSION: u32 = 1;

/// One pass/fail measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion number, if the check belongs to one.
    pub criterion: Option<u8>,
    pub pass: bool,
    pub value: Option<f64>,
    /// Human-readable bound such as `<= 1e-10`.
    pub bound: String,
    pub detail: String,
    /// Wall-clock measurement; left out of CSV bodies.
    #[serde(default)]
    pub timing: bool,
}

impl Check {
    pub fn le(name: &str, criterion: Option<u8>, value: f64, bound: f64) -> Self {
        Self::new(name, criterion, value <= bound, Some(value), format!("<= {bound:e}"))
    }

    pub fn ge(name: &str, criterion: Option<u8>, value: f64, bound: f64) -> Self {
        Self::new(name, criterion, value >= bound, Some(value), format!(">= {bound:e}"))
    }

    /// `|value − target| ≤ tol`.
    pub fn near(name: &str, criterion: Option<u8>, value: f64, target: f64, tol: f64) -> Self {
        Self::new(name, criterion, (value - target).abs() <= tol, Some(value), format!("{target} ± {tol}"))
    }

    pub fn truth(name: &str, criterion: Option<u8>, pass: bool, detail: impl Into<String>) -> Self {
        let mut c = Self::new(name, criterion, pass, None, "true".into());
        c.detail = detail.into();
        c
    }

    pub fn failed(name: &str, criterion: Option<u8>, detail: impl Into<String>) -> Self {
        Self::truth(name, criterion, false, detail)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn timed(mut self) -> Self {
        self.timing = true;
        self
    }

    fn new(name: &str, criterion: Option<u8>, pass: bool, value: Option<f64>, bound: String) -> Self {
        Self { name: name.into(), criterion, pass, value, bound, detail: String::new(), timing: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

/// Floats with 17 significant digits; non-finite values spelled out.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format_float(*v),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

/// A CSV artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r.iter().map(Cell::render))?;
            }
            w.flush()?;
        }
        write_atomic(path, &buf)
    }
}

/// What an experiment produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// Written once per run, including failed runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub config: RunConfig,
    pub code_version: String,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub status: Status,
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
}

pub fn code_version() -> String {
    format!("gclab {}", env!("CARGO_PKG_VERSION"))
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
