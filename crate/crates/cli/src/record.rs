use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Task;
use crate::CliError;

/// Bumped whenever a field of [`Record`] changes meaning or shape.
pub const SCHEMA_VERSION: u32 = 1;

/// Resolved coordinates of a sweep point as written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub sites: usize,
    pub hopping: f64,
    pub anisotropy: f64,
    pub epsilon: f64,
    pub field: f64,
    pub flux: f64,
    pub probe_field: f64,
    /// `null` is `β = ∞`.
    pub beta: Option<f64>,
    pub eta: f64,
    pub time: f64,
    pub p: f64,
    pub p0: Option<f64>,
}

/// One line of `records.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub schema_version: u32,
    pub config_hash: String,
    pub params_hash: String,
    pub task: Task,
    pub point: PointRecord,
    pub value: Option<f64>,
    pub imag: Option<f64>,
    /// Residual of an identity check, when the task is one.
    pub residual: Option<f64>,
    pub scale: Option<f64>,
    /// Verdict of verify tasks; `None` for plain measurements.
    pub pass: Option<bool>,
    /// Task-specific payload (transport metadata, fit reports).
    pub detail: serde_json::Value,
    pub error: Option<String>,
}

impl Record {
    pub fn failed(&self) -> bool {
        self.pass == Some(false) || (self.task.is_verify() && self.error.is_some())
    }
}

pub fn write_jsonl(path: &Path, records: &[Record]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(out, "{line}").map_err(|e| CliError::Io(e.to_string()))?;
    }
    out.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Reads every line that parses and reports the ones that do not.
pub fn read_jsonl(path: &Path) -> Result<(Vec<Record>, Vec<String>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Record>(line) {
            Ok(r) if r.schema_version == SCHEMA_VERSION => records.push(r),
            Ok(r) => warnings.push(format!(
                "{}:{}: schema version {} (expected {SCHEMA_VERSION}), skipped",
                path.display(),
                i + 1,
                r.schema_version
            )),
            Err(e) => warnings.push(format!("{}:{}: {e}, skipped", path.display(), i + 1)),
        }
    }
    Ok((records, warnings))
}

const CSV_HEADER: [&str; 20] = [
    "task", "config_hash", "params_hash", "index", "sites", "hopping", "anisotropy", "epsilon",
    "field", "flux", "probe_field", "beta", "eta", "time", "p", "p0", "value", "imag", "residual",
    "pass",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Flat table derived from the records; `beta` is empty for `β = ∞`.
pub fn write_csv(path: &Path, records: &[Record]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(e.to_string()))?;
    w.write_record(CSV_HEADER).map_err(|e| CliError::Io(e.to_string()))?;
    for r in records {
        let p = &r.point;
        let row = [
            r.task.label().to_string(),
            r.config_hash.clone(),
            r.params_hash.clone(),
            p.index.to_string(),
            p.sites.to_string(),
            format!("{:e}", p.hopping),
            format!("{:e}", p.anisotropy),
            format!("{:e}", p.epsilon),
            format!("{:e}", p.field),
            format!("{:e}", p.flux),
            format!("{:e}", p.probe_field),
            opt(p.beta),
            format!("{:e}", p.eta),
            format!("{:e}", p.time),
            format!("{:e}", p.p),
            opt(p.p0),
            opt(r.value),
            opt(r.imag),
            opt(r.residual),
            r.pass.map(|b| b.to_string()).unwrap_or_default(),
        ];
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
