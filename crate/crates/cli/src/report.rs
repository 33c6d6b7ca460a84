//! Tables rendered from a results directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::config::Task;
use crate::record::{read_jsonl, Record};
use crate::CliError;

/// A titled table, written both into `report.md` and as its own CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, title: &str, headers: &[&str]) -> Self {
        Table {
            name: name.into(),
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn markdown(&self) -> String {
        let mut s = format!("## {}\n\n| {} |\n|", self.title, self.headers.join(" | "));
        s.push_str(&"---|".repeat(self.headers.len()));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!("| {} |\n", r.join(" | ")));
        }
        s
    }

    fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let e = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(e)?;
        w.write_record(&self.headers).map_err(e)?;
        for r in &self.rows {
            w.write_record(r).map_err(e)?;
        }
        w.flush().map_err(|err| CliError::Io(err.to_string()))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    /// Skipped lines and other non-fatal problems.
    pub warnings: Vec<String>,
    pub records: usize,
}

impl Report {
    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn markdown(&self) -> String {
        let mut s = String::from("# xxzlab report\n\n");
        if self.is_empty() {
            s.push_str("No records.\n");
        }
        for t in &self.tables {
            s.push('\n');
            s.push_str(&t.markdown());
        }
        if !self.warnings.is_empty() {
            s.push_str("\n## Warnings\n\n");
            for w in &self.warnings {
                s.push_str(&format!("- {w}\n"));
            }
        }
        s
    }
}

fn num(x: f64) -> String {
    format!("{x:.9e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "-".into())
}

fn beta(x: Option<f64>) -> String {
    x.map(|b| format!("{b}")).unwrap_or_else(|| "inf".into())
}

fn field(v: &Value, path: &[&str]) -> Option<f64> {
    path.iter().try_fold(v, |v, k| v.get(k))?.as_f64()
}

/// Sort key of a point: every coordinate in a fixed order.
fn point_key(r: &Record) -> Vec<u64> {
    let p = &r.point;
    let ord = |x: f64| {
        // monotone map from f64 to u64
        let b = x.to_bits();
        if b >> 63 == 1 {
            !b
        } else {
            b | (1 << 63)
        }
    };
    vec![
        p.sites as u64,
        ord(p.anisotropy),
        ord(p.epsilon),
        ord(p.field),
        ord(p.flux),
        ord(p.probe_field),
        ord(p.eta),
        ord(p.time),
        ord(p.p),
        ord(p.p0.unwrap_or(0.0)),
        p.beta.map_or(u64::MAX, ord),
    ]
}

const TRANSPORT: [Task; 7] = [
    Task::CanonicalH,
    Task::CanonicalK,
    Task::EuclideanH,
    Task::EuclideanK,
    Task::TwistD,
    Task::FieldKappa,
    Task::ThermalD,
];

fn verify_table(records: &[Record]) -> Table {
    let mut t = Table::new("verify", "Verification summary", &["task", "records", "pass", "fail", "errors", "worst residual/scale"]);
    let mut by: BTreeMap<Task, (usize, usize, usize, usize, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.task.is_verify() || r.task == Task::Bethe) {
        let e = by.entry(r.task).or_default();
        e.0 += 1;
        match r.pass {
            Some(true) => e.1 += 1,
            Some(false) => e.2 += 1,
            None => {}
        }
        e.3 += r.error.is_some() as usize;
        if let (Some(res), Some(sc)) = (r.residual, r.scale) {
            let rel = if sc > 0.0 { res / sc } else { res };
            e.4 = e.4.max(rel);
        }
    }
    for (task, (n, p, f, e, worst)) in by {
        t.rows.push(vec![
            task.label().into(),
            n.to_string(),
            p.to_string(),
            f.to_string(),
            e.to_string(),
            num(worst),
        ]);
    }
    t
}

fn convergence_table(task: Task, records: &[Record]) -> Table {
    let mut t = Table::new(
        &format!("convergence_{}", task.label()),
        &format!("{} by L, λ, ε, β, η, T, p", task.label()),
        &["L", "λ", "ε", "h", "φ", "β", "η", "T", "p", "p0", "value", "imag", "error"],
    );
    let mut rows: Vec<&Record> = records.iter().filter(|r| r.task == task).collect();
    rows.sort_by_key(|r| point_key(r));
    for r in rows {
        let p = &r.point;
        t.rows.push(vec![
            p.sites.to_string(),
            format!("{}", p.anisotropy),
            format!("{}", p.epsilon),
            format!("{}", p.field),
            format!("{}", p.flux),
            beta(p.beta),
            format!("{}", p.eta),
            format!("{}", p.time),
            format!("{:.6}", p.p),
            p.p0.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into()),
            opt(r.value),
            opt(r.imag),
            r.error.clone().unwrap_or_default(),
        ]);
    }
    t
}

/// Real-time versus imaginary-time `H` at the rounded regulator, ordered so
/// that each group reads down in increasing `β`.
fn gap_table(records: &[Record]) -> Table {
    let mut t = Table::new(
        "gap_canonical_euclidean",
        "Canonical versus Euclidean H",
        &["L", "λ", "ε", "η", "T", "p", "β", "η_β", "canonical", "euclidean", "gap"],
    );
    let mut rows: Vec<&Record> = records
        .iter()
        .filter(|r| r.task == Task::CanonicalH && r.detail.get("gap").is_some())
        .collect();
    rows.sort_by_key(|r| point_key(r));
    for r in rows {
        let p = &r.point;
        t.rows.push(vec![
            p.sites.to_string(),
            format!("{}", p.anisotropy),
            format!("{}", p.epsilon),
            format!("{}", p.eta),
            format!("{}", p.time),
            format!("{:.6}", p.p),
            beta(p.beta),
            opt(field(&r.detail, &["eta_beta"])),
            opt(r.value),
            opt(field(&r.detail, &["euclidean_at_eta_beta"])),
            opt(field(&r.detail, &["gap"])),
        ]);
    }
    t
}

fn bethe_table(records: &[Record]) -> Table {
    let mut t = Table::new(
        "bethe",
        "Closed forms and Haldane residuals",
        &["λ", "J", "μ", "v", "K", "D", "κ", "r1", "r2"],
    );
    let mut rows: Vec<&Record> = records.iter().filter(|r| r.task == Task::Bethe && r.error.is_none()).collect();
    rows.sort_by_key(|r| point_key(r));
    for r in rows {
        let f = |k: &str| opt(field(&r.detail, &["forms", k]));
        t.rows.push(vec![
            format!("{}", r.point.anisotropy),
            format!("{}", r.point.hopping),
            f("mu"),
            f("v"),
            f("k_exp"),
            f("d_b"),
            f("kappa_b"),
            opt(field(&r.detail, &["r1"])),
            opt(field(&r.detail, &["r2"])),
        ]);
    }
    t
}

fn scaling_table(records: &[Record]) -> Table {
    let mut t = Table::new(
        "error_scaling",
        "Contour error scaling fits",
        &["L", "λ", "ε", "C fit", "C a priori", "β slope", "β fit R²", "T rate", "target rate", "pass"],
    );
    let mut rows: Vec<&Record> = records
        .iter()
        .filter(|r| r.task == Task::VerifyScaling && r.error.is_none())
        .collect();
    rows.sort_by_key(|r| point_key(r));
    for r in rows {
        let d = &r.detail;
        t.rows.push(vec![
            r.point.sites.to_string(),
            format!("{}", r.point.anisotropy),
            format!("{}", r.point.epsilon),
            opt(r.residual),
            opt(r.scale),
            opt(field(d, &["beta_fit", "fit", "slope"])),
            opt(field(d, &["beta_fit", "fit", "r_squared"])),
            opt(field(d, &["time_fit", "fit", "slope"]).map(|s| -s)),
            opt(field(d, &["decay_target"])),
            r.pass.map(|b| b.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

/// Builds every table that has at least one row.
pub fn build(records: &[Record]) -> Vec<Table> {
    let mut tables = vec![verify_table(records)];
    tables.extend(TRANSPORT.iter().map(|&t| convergence_table(t, records)));
    tables.push(gap_table(records));
    tables.push(bethe_table(records));
    tables.push(scaling_table(records));
    tables.retain(|t| !t.rows.is_empty());
    tables
}

/// Reads `dir/records.jsonl`; a directory without records gives an empty report.
pub fn render(dir: &Path) -> Result<Report, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Io(format!("{}: not a directory", dir.display())));
    }
    let path = dir.join("records.jsonl");
    if !path.exists() {
        return Ok(Report::default());
    }
    let (records, warnings) = read_jsonl(&path)?;
    Ok(Report {
        tables: build(&records),
        warnings,
        records: records.len(),
    })
}

/// Writes `report.md` and one `report_<table>.csv` per table into `dir`.
pub fn write(dir: &Path, report: &Report) -> Result<(), CliError> {
    let md = dir.join("report.md");
    fs::write(&md, report.markdown()).map_err(|e| CliError::Io(format!("{}: {e}", md.display())))?;
    for t in &report.tables {
        t.write_csv(&dir.join(format!("report_{}.csv", t.name)))?;
    }
    Ok(())
}
