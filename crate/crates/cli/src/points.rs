use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use xxzlab::model::{momentum, ModelParams};
use xxzlab::spectra::Temperature;

use crate::config::RunConfig;
use crate::CliError;

pub const DEFAULT_BETA: f64 = 8.0;
pub const DEFAULT_ETA: f64 = 0.5;
pub const DEFAULT_TIME: f64 = 40.0;

/// Fully resolved sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub index: usize,
    pub params: ModelParams,
    /// `None` is `β = ∞`.
    pub beta: Option<f64>,
    pub eta: f64,
    pub time: f64,
    pub p_index: i64,
    pub p0_index: i64,
}

impl Point {
    pub fn temperature(&self) -> Temperature {
        match self.beta {
            Some(b) => Temperature::Finite(b),
            None => Temperature::Zero,
        }
    }

    pub fn p(&self) -> f64 {
        let l = self.params.sites as i64;
        momentum(self.p_index.rem_euclid(l) as usize, self.params.sites)
    }

    /// `2π n/β`; only `n = 0` is meaningful at `β = ∞`.
    pub fn p0(&self) -> Result<f64, CliError> {
        match self.beta {
            Some(b) => Ok(2.0 * std::f64::consts::PI * self.p0_index as f64 / b),
            None if self.p0_index == 0 => Ok(0.0),
            None => Err(CliError::Schema("p0_index ≠ 0 needs a finite beta".into())),
        }
    }
}

fn as_index(name: &str, v: f64) -> Result<i64, CliError> {
    if v.fract() != 0.0 {
        return Err(CliError::Schema(format!("axis `{name}` needs integers, got {v}")));
    }
    Ok(v as i64)
}

fn apply(point: &mut Point, name: &str, v: f64) -> Result<(), CliError> {
    let p = &mut point.params;
    match name {
        "sites" => {
            if v.fract() != 0.0 || v < 0.0 {
                return Err(CliError::Schema(format!("sites must be a non-negative integer, got {v}")));
            }
            p.sites = v as usize;
        }
        "anisotropy" => p.anisotropy = v,
        "epsilon" => p.epsilon = v,
        "field" => p.field = v,
        "flux" => p.flux = v,
        "probe_field" => p.probe_field = v,
        "hopping" => p.hopping = v,
        "beta" => point.beta = (v.is_finite()).then_some(v),
        "eta" => point.eta = v,
        "time" => point.time = v,
        "p_index" => point.p_index = as_index(name, v)?,
        "p0_index" => point.p0_index = as_index(name, v)?,
        other => return Err(CliError::Schema(format!("unknown axis `{other}`"))),
    }
    Ok(())
}

/// Number of points in the Cartesian product of the axes.
pub fn product_size(cfg: &RunConfig) -> Result<usize, CliError> {
    let mut n: usize = 1;
    for axis in cfg.sweep.values() {
        let len = axis.values().map_err(CliError::Schema)?.len();
        n = n.checked_mul(len).ok_or_else(|| CliError::Budget {
            needed: usize::MAX,
            budget: cfg.budget,
        })?;
    }
    Ok(n)
}

/// Points in row-major order over the (alphabetically sorted) axes, or a
/// seeded random subset of them when `samples` is set.
pub fn expand(cfg: &RunConfig) -> Result<Vec<Point>, CliError> {
    let axes: Vec<(String, Vec<f64>)> = cfg
        .sweep
        .iter()
        .map(|(k, a)| Ok((k.clone(), a.values().map_err(CliError::Schema)?)))
        .collect::<Result<_, CliError>>()?;
    let total = product_size(cfg)?;
    let chosen: Vec<usize> = match cfg.samples {
        Some(k) if k < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut idx = sample(&mut rng, total, k).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..total).collect(),
    };
    let template = Point {
        index: 0,
        params: cfg.model.clone(),
        beta: Some(DEFAULT_BETA),
        eta: DEFAULT_ETA,
        time: DEFAULT_TIME,
        p_index: 1,
        p0_index: 0,
    };
    chosen
        .into_iter()
        .map(|flat| {
            let mut point = template.clone();
            point.index = flat;
            let mut rest = flat;
            for (name, values) in axes.iter().rev() {
                let v = values[rest % values.len()];
                rest /= values.len();
                apply(&mut point, name, v)?;
            }
            point
                .params
                .validate()
                .map_err(|e| CliError::Schema(format!("sweep point {flat}: {e}")))?;
            Ok(point)
        })
        .collect()
}
