use serde::{Deserialize, Serialize};

use crate::correlators::TruncationReport;
use crate::spectra::Temperature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    CanonicalH,
    CanonicalK,
    EuclideanH,
    EuclideanK,
    TwistD,
    FieldKappa,
    ThermalD,
}

impl Formulation {
    pub fn label(self) -> &'static str {
        match self {
            Formulation::CanonicalH => "canonical_H",
            Formulation::CanonicalK => "canonical_K",
            Formulation::EuclideanH => "euclidean_H",
            Formulation::EuclideanK => "euclidean_K",
            Formulation::TwistD => "twist_D",
            Formulation::FieldKappa => "field_kappa",
            Formulation::ThermalD => "thermal_D",
        }
    }
}

/// Provenance of a transport estimate. `beta = None` means `β = ∞`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub sites: usize,
    pub beta: Option<f64>,
    pub time: Option<f64>,
    pub eta: Option<f64>,
    pub p0: Option<f64>,
    pub p: Option<f64>,
    pub method: String,
    pub params_hash: String,
    pub truncation: Option<TruncationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub(crate) fn beta_field(t: Temperature) -> Option<f64> {
    match t {
        Temperature::Finite(b) => Some(b),
        Temperature::Zero => None,
    }
}

pub(crate) fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub value: f64,
    /// Imaginary residue; zero up to rounding for every formulation.
    pub imag: f64,
    pub formulation: Formulation,
    pub meta: Meta,
}

impl TransportResult {
    /// `|imag| ≤ 1e−9·max(1, |value|)`.
    pub fn is_real(&self) -> bool {
        self.imag.abs() <= 1e-9 * self.value.abs().max(1.0)
    }
}
