use std::path::PathBuf;

use pcollapse_core::Matrix;
use serde_json::{json, Map, Value};

use crate::config::{OutputFormat, Scenario, ScenarioConfig};
use crate::error::{HarnessError, Result};

pub type Record = Map<String, Value>;

/// JSON number rounded to 12 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    // avoid emitting -0
    json!(if rounded == 0.0 { 0.0 } else { rounded })
}

/// Appends `{prefix}_re_ij` and `{prefix}_im_ij` for every entry.
pub fn push_matrix(record: &mut Record, prefix: &str, m: &Matrix) {
    let d = m.dim();
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            record.insert(format!("{prefix}_re_{i}{j}"), num(z.re));
            record.insert(format!("{prefix}_im_{i}{j}"), num(z.im));
        }
    }
}

/// Comparison against a measured number; only fails the run under `--strict`.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftCheck {
    pub name: String,
    pub value: f64,
    pub low: f64,
    pub high: f64,
    pub reference: String,
}

impl SoftCheck {
    pub fn new(name: impl Into<String>, value: f64, low: f64, high: f64, reference: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value,
            low,
            high,
            reference: reference.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.value >= self.low && self.value <= self.high
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "value": num(self.value),
            "low": num(self.low),
            "high": num(self.high),
            "reference": self.reference,
            "passed": self.passed(),
        })
    }

    pub fn summary(&self) -> String {
        format!(
            "{} {} = {} in [{}, {}] ({})",
            if self.passed() { "PASS" } else { "MISS" },
            self.name,
            num(self.value),
            num(self.low),
            num(self.high),
            self.reference
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub config: Value,
    pub records: Vec<Record>,
    pub seed: u64,
    pub soft_checks: Vec<SoftCheck>,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

impl RunReport {
    pub fn new(scenario: Scenario, cfg: &ScenarioConfig) -> Self {
        Self {
            scenario,
            config: cfg.to_json(),
            records: Vec::new(),
            seed: cfg.seed,
            soft_checks: Vec::new(),
        }
    }

    pub fn soft_failures(&self) -> usize {
        self.soft_checks.iter().filter(|c| !c.passed()).count()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "scenario": self.scenario.name(),
            "config": self.config,
            "records": self.records,
            "seed": self.seed,
            "version": VERSION,
            "soft_checks": self.soft_checks.iter().map(SoftCheck::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    /// Records as CSV with the union of record keys as header, in first-seen order.
    pub fn records_csv(&self) -> Result<String> {
        let mut rows = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let mut row = Record::new();
            row.insert("scenario".into(), json!(self.scenario.name()));
            row.insert("seed".into(), json!(self.seed));
            row.extend(r.clone());
            rows.push(row);
        }
        to_csv(&rows)
    }

    pub fn checks_csv(&self) -> Result<String> {
        let rows: Vec<Record> = self
            .soft_checks
            .iter()
            .map(|c| match c.to_json() {
                Value::Object(m) => m,
                _ => unreachable!(),
            })
            .collect();
        to_csv(&rows)
    }

    /// Writes the report in the configured format; returns the files written.
    pub fn write(&self, cfg: &ScenarioConfig) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        match cfg.format {
            OutputFormat::Json => {
                let path = cfg.output_path(self.scenario, "", "json");
                write_file(&path, &self.to_json_string())?;
                written.push(path);
            }
            OutputFormat::Csv => {
                let path = cfg.output_path(self.scenario, "", OutputFormat::Csv.extension());
                write_file(&path, &self.records_csv()?)?;
                written.push(path);
                let meta = json!({
                    "scenario": self.scenario.name(),
                    "config": self.config,
                    "seed": self.seed,
                    "version": VERSION,
                });
                let path = cfg.output_path(self.scenario, "_meta", "json");
                let mut text = serde_json::to_string_pretty(&meta).expect("meta serializes");
                text.push('\n');
                write_file(&path, &text)?;
                written.push(path);
                if !self.soft_checks.is_empty() {
                    let path = cfg.output_path(self.scenario, "_checks", "csv");
                    write_file(&path, &self.checks_csv()?)?;
                    written.push(path);
                }
            }
        }
        Ok(written)
    }
}

fn write_file(path: &std::path::Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn to_csv(rows: &[Record]) -> Result<String> {
    let mut header: Vec<String> = Vec::new();
    for row in rows {
        for key in row.keys() {
            if !header.contains(key) {
                header.push(key.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| HarnessError::Config(format!("csv encoding: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let cells: Vec<String> = header.iter().map(|k| row.get(k).map(cell).unwrap_or_default()).collect();
        w.write_record(&cells).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
