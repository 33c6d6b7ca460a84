//! Drude weights and susceptibilities in their canonical, Euclidean, twist,
//! field and thermal formulations, plus the Bethe-ansatz closed forms.

mod bethe;
mod fit;
mod ground;
mod result;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::correlators::{
    connected_matsubara, fock_sectors, kind_operators, kubo_inner, matsubara_index, Kind,
    LehmannTable,
};
use crate::error::{Error, Result};
use crate::model::{build_kinetic, build_total_current, momentum, momentum_index};
use crate::spectra::{thermal_expectation, SpectralData};

pub use bethe::{bethe_closed_forms, haldane_residuals, BetheForms, Normalization};
pub use fit::{fit_inverse_l, InverseLFit};
pub use ground::{
    field_susceptibility, sector_ground_energy, twist_drude, FieldMethod, FieldOptions,
    TwistMethod, TwistOptions,
};
pub use result::{Formulation, Meta, TransportResult};

use result::{beta_field, finite};

/// Regulator of the density commutator integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KKernel {
    /// `e^{−iηt}`, oscillatory.
    #[default]
    Oscillatory,
    /// `e^{ηt}`, damped like the current integral.
    Damped,
}

fn check_eta_time(eta: f64, t_max: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("η = {eta} must be positive")));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("T = {t_max} must be positive")));
    }
    Ok(())
}

/// `⟨Δ⟩/L` on the sectors of `spec`.
pub fn kinetic_density(spec: &SpectralData) -> Result<f64> {
    let delta = build_kinetic(spec.params(), &fock_sectors(spec))?;
    Ok(thermal_expectation(&delta, spec)?.re / spec.sites() as f64)
}

fn grid_p(spec: &SpectralData, p: f64) -> Result<f64> {
    Ok(momentum(momentum_index(p, spec.sites())?, spec.sites()))
}

fn meta(spec: &SpectralData, method: &str) -> Meta {
    Meta {
        sites: spec.sites(),
        beta: beta_field(spec.temperature()),
        method: method.to_string(),
        params_hash: spec.params().hash(),
        ..Default::default()
    }
}

fn result(value: c64, formulation: Formulation, meta: Meta) -> TransportResult {
    TransportResult {
        value: value.re,
        imag: value.im,
        formulation,
        meta,
    }
}

/// `(i/L)[∫_{−T}^0 e^{ηt} ⟨[ĵ_p(t), ĵ_{−p}]⟩ dt + i⟨Δ⟩]`; `T = ∞` allowed.
pub fn canonical_h(spec: &SpectralData, eta: f64, p: f64, t_max: f64) -> Result<TransportResult> {
    check_eta_time(eta, t_max)?;
    let p = grid_p(spec, p)?;
    let table = LehmannTable::for_kind(spec, Kind::JJ, p)?;
    let integral = table.damped_commutator_integral(eta, t_max);
    let value = c64::new(0.0, 1.0) * integral - kinetic_density(spec)?;
    let mut m = meta(spec, "lehmann_closed_form");
    m.eta = Some(eta);
    m.time = finite(t_max);
    m.p = Some(p);
    m.truncation = Some(table.truncation());
    Ok(result(value, Formulation::CanonicalH, m))
}

/// `−(i/L) ∫_{−T}^0 k(t) ⟨[ρ̂_p(t), ρ̂_{−p}]⟩ dt` with kernel `e^{−iηt}` or `e^{ηt}`.
pub fn canonical_k(
    spec: &SpectralData,
    eta: f64,
    p: f64,
    t_max: f64,
    kernel: KKernel,
) -> Result<TransportResult> {
    check_eta_time(eta, t_max)?;
    let p = grid_p(spec, p)?;
    let table = LehmannTable::for_kind(spec, Kind::RhoRho, p)?;
    let integral = match kernel {
        KKernel::Oscillatory => {
            if t_max.is_infinite() {
                return Err(Error::InvalidArgument(
                    "the oscillatory kernel needs a finite T".into(),
                ));
            }
            table.oscillatory_commutator_integral(eta, t_max)
        }
        KKernel::Damped => table.damped_commutator_integral(eta, t_max),
    };
    let value = c64::new(0.0, -1.0) * integral;
    let method = match kernel {
        KKernel::Oscillatory => "lehmann_closed_form/oscillatory_kernel",
        KKernel::Damped => "lehmann_closed_form/damped_kernel",
    };
    let mut m = meta(spec, method);
    m.eta = Some(eta);
    m.time = finite(t_max);
    m.p = Some(p);
    m.truncation = Some(table.truncation());
    Ok(result(value, Formulation::CanonicalK, m))
}

fn euclidean(spec: &SpectralData, kind: Kind, p0: f64, p: f64) -> Result<(c64, Meta)> {
    matsubara_index(p0, spec.temperature())?;
    let p = grid_p(spec, p)?;
    let (a, b) = kind_operators(spec, kind, p)?;
    let table = LehmannTable::new(spec, &a, &b)?;
    let value = connected_matsubara(spec, &table, &a, &b, p0)?;
    let mut m = meta(spec, "lehmann_closed_form");
    m.p0 = Some(p0);
    m.p = Some(p);
    m.truncation = Some(table.truncation());
    Ok((value, m))
}

/// `−(1/L)⟨T ĵ_p ; ĵ_{−p}⟩(p0) − ⟨Δ⟩/L`.
pub fn euclidean_h(spec: &SpectralData, p0: f64, p: f64) -> Result<TransportResult> {
    let (jj, m) = euclidean(spec, Kind::JJ, p0, p)?;
    let value = -jj - kinetic_density(spec)?;
    Ok(result(value, Formulation::EuclideanH, m))
}

/// `(1/L)⟨T ρ̂_p ; ρ̂_{−p}⟩(p0)`.
pub fn euclidean_k(spec: &SpectralData, p0: f64, p: f64) -> Result<TransportResult> {
    let (rr, m) = euclidean(spec, Kind::RhoRho, p0, p)?;
    Ok(result(rr, Formulation::EuclideanK, m))
}

/// `(1/L)⟨𝒥𝒥⟩^K + (i/L) ∫_{−∞}^0 e^{ηs} ⟨[𝒥(s), 𝒥]⟩ ds`.
pub fn thermal_drude_regularized(spec: &SpectralData, eta: f64) -> Result<TransportResult> {
    check_eta_time(eta, f64::INFINITY)?;
    let current = build_total_current(spec.params(), &fock_sectors(spec))?;
    let l = spec.sites() as f64;
    let kubo = kubo_inner(spec, &current, &current)? / l;
    let table = LehmannTable::new(spec, &current, &current)?;
    let integral = table.damped_commutator_integral(eta, f64::INFINITY);
    let value = kubo + c64::new(0.0, 1.0) * integral;
    let mut m = meta(spec, "kubo_product+damped_commutator");
    m.eta = Some(eta);
    m.p = Some(0.0);
    m.truncation = Some(table.truncation());
    Ok(result(value, Formulation::ThermalD, m))
}
