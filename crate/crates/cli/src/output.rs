//! CSV tables and the run manifest.

use std::fmt::Write as _;
use std::path::PathBuf;

use fidmem::{LineShape, Resolution};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Bumped whenever a column is added, removed or renamed.
pub const CSV_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Bool(bool),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            // Shortest round-trip form; scientific outside [1e-4, 1e7).
            Cell::Num(x) if *x == 0.0 || (1e-4..1e7).contains(&x.abs()) => write!(f, "{x}"),
            Cell::Num(x) => write!(f, "{x:e}"),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Column {
    pub name: &'static str,
    /// "1" for dimensionless quantities.
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// CSV text with `#` header comments. Contains nothing run-specific
    /// beyond the configuration hash, so equal configs give equal bytes.
    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# fidmem {} | mode {} | table {} | schema {CSV_SCHEMA}",
            env!("CARGO_PKG_VERSION"),
            cfg.mode.name(),
            self.name
        );
        let _ = writeln!(s, "# config_hash {}", cfg.hash());
        let units: Vec<String> = self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
        let _ = writeln!(s, "# units: {}", units.join(", "));
        let names: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        let _ = writeln!(s, "{}", names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// Non-convergence reports; any entry makes the run exit with code 2.
    pub issues: Vec<String>,
    pub notes: Vec<String>,
    pub lines: Vec<LineShape>,
}

impl RunOutput {
    pub fn converged(&self) -> bool {
        self.issues.is_empty()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    mode: &'static str,
    config_hash: String,
    created_unix: u64,
    workers: usize,
    converged: bool,
    non_convergence: &'a [String],
    notes: &'a [String],
    files: Vec<String>,
    resolutions: Vec<ResolutionEntry>,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct ResolutionEntry {
    line: LineShape,
    #[serde(flatten)]
    resolution: Resolution,
}

/// Writes every table as `<name>.csv` plus `manifest.toml` into the output
/// directory, which is created if needed.
pub fn write_outputs(cfg: &RunConfig, out: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(&cfg.out)?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for t in &out.tables {
        let name = format!("{}.csv", t.name);
        let path = cfg.out.join(&name);
        std::fs::write(&path, t.to_csv(cfg))?;
        files.push(name);
        written.push(path);
    }
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let manifest = Manifest {
        tool: "fidmem",
        version: env!("CARGO_PKG_VERSION"),
        mode: cfg.mode.name(),
        config_hash: cfg.hash(),
        created_unix,
        workers: cfg.workers,
        converged: out.converged(),
        non_convergence: &out.issues,
        notes: &out.notes,
        files,
        resolutions: out
            .lines
            .iter()
            .map(|&line| ResolutionEntry {
                line,
                resolution: cfg.resolution.apply(line),
            })
            .collect(),
        config: cfg,
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::config(format!("manifest: {e}")))?;
    let path = cfg.out.join("manifest.toml");
    std::fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}
