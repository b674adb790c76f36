//! Tables, run reports and their CSV/JSON encodings.

use std::fmt::Write as _;
use std::time::Duration;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Box<RawValue> {
        let text = match self {
            Cell::Num(v) if v.is_finite() => fmt_f64(*v),
            Cell::Num(_) => "null".into(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
        };
        RawValue::from_string(text).expect("valid JSON literal")
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        let columns = columns.iter().map(|(n, u)| Column { name: n.to_string(), unit: u.to_string() }).collect();
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }
}

/// A named scalar result with its unit tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

/// One comparison against an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    /// `abs`, `rel` or `sigma`.
    pub measure: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
    pub unit: String,
}

impl Check {
    pub fn abs(name: impl Into<String>, value: f64, reference: f64, tolerance: f64, unit: &str) -> Self {
        let deviation = (value - reference).abs();
        Self { name: name.into(), value, reference, measure: "abs", deviation, tolerance, unit: unit.into() }
    }

    pub fn rel(name: impl Into<String>, value: f64, reference: f64, tolerance: f64, unit: &str) -> Self {
        let deviation = if reference == 0.0 { value.abs() } else { (value - reference).abs() / reference.abs() };
        Self { name: name.into(), value, reference, measure: "rel", deviation, tolerance, unit: unit.into() }
    }

    /// `deviation` is given directly (for example a max-norm over a grid).
    pub fn max_dev(name: impl Into<String>, deviation: f64, tolerance: f64, measure: &'static str, unit: &str) -> Self {
        Self { name: name.into(), value: deviation, reference: 0.0, measure, deviation, tolerance, unit: unit.into() }
    }

    pub fn pass(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub units: String,
    pub inputs: Vec<(String, String, String)>,
    pub summary: Vec<Summary>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn summarize(&mut self, name: impl Into<String>, value: f64, unit: &str) {
        self.summary.push(Summary { name: name.into(), value, unit: unit.into() });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    /// Human-readable report; wall time is the only run-dependent line.
    pub fn render(&self, rows: usize) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {} (units {}, seed {})", self.scenario, self.units, self.seed);
        for (k, v, u) in &self.inputs {
            let _ = writeln!(s, "input  {k} = {v} [{u}]");
        }
        let _ = writeln!(s, "output rows = {rows}");
        for x in &self.summary {
            let _ = writeln!(s, "result {} = {} [{}]", x.name, fmt_f64(x.value), x.unit);
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: value {} reference {} {} deviation {} (tolerance {}) [{}]",
                if c.pass() { "PASS" } else { "FAIL" },
                c.name,
                fmt_f64(c.value),
                fmt_f64(c.reference),
                c.measure,
                fmt_f64(c.deviation),
                fmt_f64(c.tolerance),
                c.unit
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "wall time: {:.3} s", self.wall_time.as_secs_f64());
        s
    }

    /// Failed checks only, for the numerical-failure exit path.
    pub fn diff(&self) -> String {
        let mut s = String::new();
        for c in self.checks.iter().filter(|c| !c.pass()) {
            let _ = writeln!(
                s,
                "oracle mismatch {}: value {} reference {} {} deviation {} exceeds {} [{}]",
                c.name,
                fmt_f64(c.value),
                fmt_f64(c.reference),
                c.measure,
                fmt_f64(c.deviation),
                fmt_f64(c.tolerance),
                c.unit
            );
        }
        s
    }
}

pub fn to_csv(table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = table.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
    let to_err = |e: csv::Error| CliError::Invalid(format!("csv encoding: {e}"));
    w.write_record(&header).map_err(to_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv)).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Invalid(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct JsonInput<'a> {
    name: &'a str,
    value: &'a str,
    unit: &'a str,
}

#[derive(Serialize)]
struct JsonValue<'a> {
    name: &'a str,
    value: Box<RawValue>,
    unit: &'a str,
}

#[derive(Serialize)]
struct JsonCheck<'a> {
    name: &'a str,
    value: Box<RawValue>,
    reference: Box<RawValue>,
    measure: &'a str,
    deviation: Box<RawValue>,
    tolerance: Box<RawValue>,
    unit: &'a str,
    pass: bool,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    schema_version: u32,
    scenario: &'a str,
    seed: u64,
    units: &'a str,
    inputs: Vec<JsonInput<'a>>,
    columns: &'a [Column],
    rows: Vec<Vec<Box<RawValue>>>,
    summary: Vec<JsonValue<'a>>,
    checks: Vec<JsonCheck<'a>>,
    notes: &'a [String],
}

fn raw(v: f64) -> Box<RawValue> {
    Cell::Num(v).json()
}

/// JSON mirror of the table plus the report; wall time is left out so
/// repeated runs are byte-identical.
pub fn to_json(table: &Table, report: &RunReport) -> Result<String, CliError> {
    let doc = JsonDoc {
        schema_version: 1,
        scenario: &report.scenario,
        seed: report.seed,
        units: &report.units,
        inputs: report.inputs.iter().map(|(n, v, u)| JsonInput { name: n, value: v, unit: u }).collect(),
        columns: &table.columns,
        rows: table.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect(),
        summary: report.summary.iter().map(|s| JsonValue { name: &s.name, value: raw(s.value), unit: &s.unit }).collect(),
        checks: report
            .checks
            .iter()
            .map(|c| JsonCheck {
                name: &c.name,
                value: raw(c.value),
                reference: raw(c.reference),
                measure: c.measure,
                deviation: raw(c.deviation),
                tolerance: raw(c.tolerance),
                unit: &c.unit,
                pass: c.pass(),
            })
            .collect(),
        notes: &report.notes,
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Invalid(format!("json encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}
