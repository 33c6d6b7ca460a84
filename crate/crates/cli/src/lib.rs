//! Batch front end for `xxzlab`: configuration parsing, sweep execution,
//! result persistence and report rendering.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;

pub mod config;
pub mod oracle_check;
pub mod points;
pub mod record;
pub mod report;
pub mod tasks;

use config::{Format, RunConfig, Task};
use record::Record;
use tasks::{run_one, SpectrumCache};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("refusing to run: {needed} evaluations exceed the budget of {budget}")]
    Budget { needed: usize, budget: usize },
    #[error(transparent)]
    Core(#[from] xxzlab::Error),
}

/// Command-line overrides of the configuration file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub budget: Option<usize>,
    /// `None` enables deterministic mode exactly when a verify task is present.
    pub deterministic: Option<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TaskCounts {
    pub records: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub points: usize,
    pub per_task: BTreeMap<Task, TaskCounts>,
}

impl RunSummary {
    pub fn records(&self) -> usize {
        self.per_task.values().map(|c| c.records).sum()
    }

    pub fn failures(&self) -> usize {
        self.per_task.values().map(|c| c.failed).sum()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures() == 0 {
            0
        } else {
            1
        }
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "config {}  points {}  records {}\n{:<18} {:>8} {:>8} {:>8} {:>8}\n",
            &self.config_hash[..12],
            self.points,
            self.records(),
            "task",
            "records",
            "pass",
            "fail",
            "errors"
        );
        for (task, c) in &self.per_task {
            s.push_str(&format!(
                "{:<18} {:>8} {:>8} {:>8} {:>8}\n",
                task.label(),
                c.records,
                c.passed,
                c.failed,
                c.errors
            ));
        }
        s
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Executes every `(task, point)` pair of `cfg` and writes the records.
///
/// The config hash is taken before overrides, so reruns of the same file
/// with different `--out` or `--threads` carry the same hash.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let config_hash = cfg.hash();
    let out_dir = opts.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let budget = opts.budget.unwrap_or(cfg.budget);

    let mut tasks = cfg.tasks.clone();
    tasks.sort();
    tasks.dedup();
    let summary = |points| RunSummary {
        out_dir: out_dir.clone(),
        config_hash: config_hash.clone(),
        points,
        per_task: BTreeMap::new(),
    };
    if tasks.is_empty() {
        return Ok(summary(0));
    }
    let total = points::product_size(cfg)?;
    let n_points = cfg.samples.map_or(total, |k| k.min(total));
    let needed = n_points.saturating_mul(tasks.len());
    if needed > budget {
        return Err(CliError::Budget { needed, budget });
    }
    let points = points::expand(cfg)?;

    let deterministic = opts
        .deterministic
        .unwrap_or_else(|| tasks.iter().any(|t| t.is_verify()));
    xxzlab::set_deterministic(deterministic);
    let threads = opts.threads.or(cfg.threads).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;

    fs::create_dir_all(&out_dir).map_err(io(&out_dir))?;
    // JSON lines are the primary store and always written; CSV is derived
    let jsonl = out_dir.join("records.jsonl");

    let records = pool.install(|| -> Result<Vec<Record>, CliError> {
        let spectral: Vec<_> = points
            .iter()
            .filter(|_| tasks.iter().any(|t| t.needs_spectrum()))
            .map(|p| p.params.clone())
            .collect();
        let cache = SpectrumCache::build(&spectral)?;
        let jobs: Vec<(Task, &points::Point)> = points
            .iter()
            .flat_map(|p| tasks.iter().map(move |&t| (t, p)))
            .collect();

        let (tx, rx) = mpsc::channel::<(usize, Record)>();
        let writer_path = jsonl.clone();
        let n_jobs = jobs.len();
        let writer = std::thread::spawn(move || append_in_order(&writer_path, rx, n_jobs));
        jobs.par_iter().enumerate().for_each_with(tx, |tx, (i, (task, point))| {
            let record = run_one(*task, point, &cache, &config_hash);
            // the writer only hangs up after a failed write, reported below
            let _ = tx.send((i, record));
        });
        writer.join().expect("writer thread panicked")
    })?;

    if cfg.output.formats.contains(&Format::Csv) {
        record::write_csv(&out_dir.join("records.csv"), &records)?;
    }

    let mut s = summary(points.len());
    for r in &records {
        let c = s.per_task.entry(r.task).or_default();
        c.records += 1;
        match r.pass {
            Some(true) => c.passed += 1,
            Some(false) => c.failed += 1,
            None => {}
        }
        if r.error.is_some() {
            c.errors += 1;
        }
    }
    Ok(s)
}

/// Single appender: writes records as soon as every earlier job has arrived,
/// so the file is in job order whatever the scheduling.
fn append_in_order(path: &Path, rx: mpsc::Receiver<(usize, Record)>, n: usize) -> Result<Vec<Record>, CliError> {
    let file = File::create(path).map_err(io(path))?;
    let mut out = BufWriter::new(file);
    let mut pending = BTreeMap::new();
    let mut next = 0;
    let mut done = Vec::with_capacity(n);
    for (i, r) in rx {
        pending.insert(i, r);
        while let Some(r) = pending.remove(&next) {
            let line = serde_json::to_string(&r).expect("records serialize");
            writeln!(out, "{line}").map_err(io(path))?;
            done.push(r);
            next += 1;
        }
    }
    out.flush().map_err(io(path))?;
    Ok(done)
}

pub use record::{read_jsonl, write_csv, write_jsonl, SCHEMA_VERSION};
