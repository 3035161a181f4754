//! Deterministic CSV/JSON output.
//!
//! Every JSON document is `{schema_version, kind, config, result}`. Floats are
//! written in shortest round-trip form, so identical runs give identical bytes.

use crate::sweep::{ConvergenceTable, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use std::path::Path;
use vpblimit_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<C, R> {
    pub schema_version: u32,
    pub kind: String,
    pub config: C,
    pub result: R,
}

impl<C, R> Document<C, R> {
    pub fn new(kind: &str, config: C, result: R) -> Self {
        Self { schema_version: SCHEMA_VERSION, kind: kind.to_string(), config, result }
    }
}

/// Column-oriented table with a fixed header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Structure(format!("row of {} cells for {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

pub const CONVERGENCE_COLUMNS: [&str; 21] = [
    "epsilon",
    "dt",
    "steps",
    "status",
    "err_u",
    "err_sigma",
    "boussinesq_residual",
    "incompressibility_residual",
    "dissipation_integral",
    "e_n0",
    "energy_ratio_sup",
    "closure_rel_diff_max",
    "remainder_a_sup",
    "remainder_b_sup",
    "remainder_a_l2t",
    "remainder_b_l2t",
    "mass_drift_max",
    "momentum_drift_max",
    "energy_drift_max",
    "positivity_violations",
    "failure",
];

pub const SAMPLE_COLUMNS: [&str; 17] = [
    "epsilon",
    "t",
    "err_u",
    "err_sigma",
    "boussinesq",
    "incompressibility",
    "E_N",
    "D_N",
    "micro_nu_sq",
    "E_int",
    "closure_rel_diff_a",
    "closure_rel_diff_b",
    "remainder_a",
    "remainder_b",
    "mass_drift",
    "momentum_drift",
    "energy_drift",
];

pub fn convergence_table(t: &ConvergenceTable) -> Result<Table> {
    let mut out = Table::new(&CONVERGENCE_COLUMNS);
    for r in &t.rows {
        let mut row: Vec<Cell> = vec![r.epsilon.into(), r.dt.into(), r.steps.into()];
        row.push(Cell::Text(if r.failure.is_none() { "ok".into() } else { "failed".into() }));
        match &r.metrics {
            Some(m) => row.extend([
                m.err_u.into(),
                m.err_sigma.into(),
                m.boussinesq_residual.into(),
                m.incompressibility_residual.into(),
                m.dissipation_integral.into(),
                m.e_n0.into(),
                m.energy_ratio_sup.into(),
                m.closure_rel_diff_max.into(),
                m.remainder_a_sup.into(),
                m.remainder_b_sup.into(),
                m.remainder_a_l2t.into(),
                m.remainder_b_l2t.into(),
                m.mass_drift_max.into(),
                m.momentum_drift_max.into(),
                m.energy_drift_max.into(),
                m.positivity_violations.into(),
            ]),
            None => row.extend(std::iter::repeat(Cell::Empty).take(16)),
        }
        row.push(r.failure.clone().map_or(Cell::Empty, Cell::Text));
        out.push(row)?;
    }
    Ok(out)
}

pub fn sample_table(t: &ConvergenceTable) -> Result<Table> {
    let mut out = Table::new(&SAMPLE_COLUMNS);
    for s in &t.samples {
        out.push(vec![
            s.epsilon.into(),
            s.t.into(),
            s.err_u.into(),
            s.err_sigma.into(),
            s.boussinesq.into(),
            s.incompressibility.into(),
            s.e_n.into(),
            s.d_n.into(),
            s.micro_nu_sq.into(),
            s.e_int.into(),
            s.closure_rel_diff_a.into(),
            s.closure_rel_diff_b.into(),
            s.remainder_a.into(),
            s.remainder_b.into(),
            s.mass_drift.into(),
            s.momentum_drift.into(),
            s.energy_drift.into(),
        ])?;
    }
    Ok(out)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("json: {e}")))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

/// Writes `<stem>.csv` (rows) and/or `<stem>.json` (config echo plus table) into `dir`.
pub fn emit<C: Serialize>(
    dir: &Path,
    stem: &str,
    kind: &str,
    config: &C,
    table: &ConvergenceTable,
    formats: &[Format],
) -> Result<()> {
    for f in formats {
        match f {
            Format::Csv => {
                write_text(&dir.join(format!("{stem}.csv")), &convergence_table(table)?.to_csv()?)?;
                write_text(&dir.join(format!("{stem}_samples.csv")), &sample_table(table)?.to_csv()?)?;
            }
            Format::Json => {
                write_text(&dir.join(format!("{stem}.json")), &to_json(&Document::new(kind, config, table))?)?;
            }
        }
    }
    Ok(())
}
