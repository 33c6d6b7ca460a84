use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use xxzlab::model::ModelParams;

use crate::CliError;

/// One sweep axis: an explicit list or a generated range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range(RangeSpec),
}

/// `num` points from `start` to `stop` inclusive, evenly or geometrically spaced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub num: usize,
    #[serde(default)]
    pub geometric: bool,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        let v = match self {
            Axis::List(v) => v.clone(),
            Axis::Range(r) => {
                if r.geometric && !(r.start > 0.0 && r.stop > 0.0) {
                    return Err("geometric ranges need positive endpoints".into());
                }
                range(r.start, r.stop, r.num, r.geometric)?
            }
        };
        if v.is_empty() {
            return Err("empty axis".into());
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err("non-finite axis value".into());
        }
        Ok(v)
    }
}

fn range(start: f64, stop: f64, num: usize, geometric: bool) -> Result<Vec<f64>, String> {
    match num {
        0 => Err("empty axis".into()),
        1 => Ok(vec![start]),
        _ => Ok((0..num)
            .map(|i| {
                let t = i as f64 / (num - 1) as f64;
                if geometric {
                    start * (stop / start).powf(t)
                } else {
                    start + (stop - start) * t
                }
            })
            .collect()),
    }
}

/// Work performed at every sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    CanonicalH,
    CanonicalK,
    EuclideanH,
    EuclideanK,
    TwistD,
    FieldKappa,
    ThermalD,
    Bethe,
    VerifyContinuity,
    VerifyWard,
    VerifyStatic,
    VerifyWick,
    VerifyScaling,
    Oracle,
}

impl Task {
    pub fn is_verify(self) -> bool {
        matches!(
            self,
            Task::VerifyContinuity
                | Task::VerifyWard
                | Task::VerifyStatic
                | Task::VerifyWick
                | Task::VerifyScaling
                | Task::Oracle
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Task::CanonicalH => "canonical_h",
            Task::CanonicalK => "canonical_k",
            Task::EuclideanH => "euclidean_h",
            Task::EuclideanK => "euclidean_k",
            Task::TwistD => "twist_d",
            Task::FieldKappa => "field_kappa",
            Task::ThermalD => "thermal_d",
            Task::Bethe => "bethe",
            Task::VerifyContinuity => "verify_continuity",
            Task::VerifyWard => "verify_ward",
            Task::VerifyStatic => "verify_static",
            Task::VerifyWick => "verify_wick",
            Task::VerifyScaling => "verify_scaling",
            Task::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Jsonl,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Jsonl, Format::Csv]
}

/// Names accepted as sweep axes.
pub const AXES: [&str; 12] = [
    "sites", "anisotropy", "epsilon", "field", "flux", "probe_field", "beta", "eta", "time",
    "p_index", "p0_index", "hopping",
];

/// Parsed `--config` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Template; sweep axes override individual fields.
    pub model: ModelParams,
    #[serde(default)]
    pub sweep: BTreeMap<String, Axis>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Drives the random subset selection when `samples` is set.
    #[serde(default)]
    pub seed: u64,
    /// Evaluate a random subset of this many sweep points instead of all.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    100_000
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Schema(m) => CliError::Schema(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, axis) in &self.sweep {
            if !AXES.contains(&name.as_str()) {
                return Err(CliError::Schema(format!(
                    "unknown sweep axis `{name}`; expected one of {}",
                    AXES.join(", ")
                )));
            }
            axis.values()
                .map_err(|e| CliError::Schema(format!("sweep axis `{name}`: {e}")))?;
        }
        if self.samples == Some(0) {
            return Err(CliError::Schema("`samples` must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
