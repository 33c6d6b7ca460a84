//! Exact finite-volume identities as numerical checks: Ward and static
//! current identities, the contour decomposition relating real-time and
//! imaginary-time Drude weights, its error scaling, and a driven-evolution
//! check of linear response.

mod adiabatic;
mod fit;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::correlators::{
    damped_integral, fock_sectors, fourier_component, matsubara_correlator, matsubara_index,
    matsubara_rounding, Kind, LehmannTable,
};
use crate::error::{Error, Result};
use crate::model::{build_kinetic_site, momentum, momentum_index, BlockOperator, ModelParams};
use crate::spectra::{diagonalize, thermal_expectation, SectorSelection, SpectralData, Temperature};
use crate::transport::{canonical_h, euclidean_h};

pub use adiabatic::{adiabatic_response_sim, AdiabaticOptions, AdiabaticReport};
pub use fit::{linear_fit, LinearFit};

/// Absolute residual, in units of the hopping, below which an identity holds
/// whatever its scale. Identities whose terms all vanish (conserved charge at
/// `p = 0`, `⟨Tĵ_p; ρ̂_{−p}⟩` at `p0 = 0`) otherwise compare rounding noise
/// against rounding noise; Lehmann sums over `2^L` states leave a few `1e-14`.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Residual of an identity together with the largest modulus among its terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub residual: f64,
    pub scale: f64,
}

impl IdentityCheck {
    fn from_terms(residual: f64, terms: &[c64]) -> Self {
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        IdentityCheck { residual, scale }
    }

    /// `residual ≤ tol·scale`, or below [`ROUNDOFF_FLOOR`].
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol * self.scale || self.residual <= ROUNDOFF_FLOOR
    }

    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

/// `p0⟨Tρ̂_p; ô_{ν,−p}⟩ = (1 − e^{−ip})⟨Tĵ_p; ô_{ν,−p}⟩ − (i/L)⟨[ρ̂_p, ô_{ν,−p}]⟩`.
///
/// `ν = 0` pairs with the density, `ν = 1` with the current. All terms carry
/// the `1/L` of the correlators; the equal-time commutator is evaluated as
/// the thermal expectation of the operator commutator.
pub fn ward_residual(spec: &SpectralData, p: f64, p0: f64, nu: usize) -> Result<IdentityCheck> {
    matsubara_index(p0, spec.temperature())?;
    let l = spec.sites();
    let m = momentum_index(p, l)?;
    let p = momentum(m, l);
    let (rho_kind, j_kind) = match nu {
        0 => (Kind::RhoRho, Kind::JRho),
        1 => (Kind::RhoJ, Kind::JJ),
        _ => return Err(Error::InvalidArgument(format!("component {nu}"))),
    };
    let m_rho = matsubara_correlator(spec, rho_kind, p, p0)?;
    let m_j = matsubara_correlator(spec, j_kind, p, p0)?;
    let rho_p = fourier_component(spec, 0, p)?;
    let o_minus = fourier_component(spec, nu, momentum((l - m) % l, l))?;
    let comm = BlockOperator::commutator(&rho_p, &o_minus)?;
    let comm = thermal_expectation(&comm, spec)? / l as f64;
    let eta_p = c64::new(1.0, 0.0) - c64::from_polar(1.0, -p);
    let lhs = m_rho * p0;
    let j_term = eta_p * m_j;
    let c_term = c64::new(0.0, -1.0) * comm;
    let residual = (lhs - j_term - c_term).norm();
    Ok(IdentityCheck::from_terms(residual, &[lhs, j_term, c_term]))
}

/// `(1/L)⟨Tĵ_p; ĵ_{−p}⟩(p0 = 0) + ⟨Δ_0⟩ = 0` for `p ≠ 0`.
pub fn static_jj_identity(spec: &SpectralData, p: f64) -> Result<IdentityCheck> {
    let l = spec.sites();
    let m = momentum_index(p, l)?;
    if m == 0 {
        return Err(Error::InvalidArgument("the static identity needs p ≠ 0".into()));
    }
    let jj = matsubara_correlator(spec, Kind::JJ, momentum(m, l), 0.0)?;
    let delta0 = build_kinetic_site(spec.params(), 0, &fock_sectors(spec))?;
    let d = thermal_expectation(&delta0, spec)?;
    Ok(IdentityCheck::from_terms((jj + d).norm(), &[jj, d]))
}

/// Pieces of the rectangle-contour identity
/// `lhs = euclidean_part + err1 + err2` for the current–current commutator
/// integral `(1/L)∫_{−T}^0 e^{ηt}⟨[ĵ_p(t), ĵ_{−p}]⟩dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WickReport {
    pub lhs: c64,
    /// `i·(1/L)∫_0^β e^{iη_β τ}⟨ĵ_p(−iτ) ĵ_{−p}⟩dτ`.
    pub euclidean_part: c64,
    /// Replacing `η` by `η_β` in the real-time integral.
    pub err1: c64,
    /// Vertical contour segment at `Re t = −T`.
    pub err2: c64,
    pub residual: f64,
    pub scale: f64,
    pub eta_beta: f64,
}

impl WickReport {
    /// `residual ≤ tol·scale`, or below [`ROUNDOFF_FLOOR`].
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol * self.scale || self.residual <= ROUNDOFF_FLOOR
    }
}

/// Contour decomposition from one Lehmann table, every piece in closed form.
pub fn wick_from_table(table: &LehmannTable, eta: f64, t_max: f64) -> Result<WickReport> {
    if !(eta > 0.0) || !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!("need η > 0 and finite T > 0, got η = {eta}, T = {t_max}")));
    }
    let temperature = table.temperature();
    let eta_beta = matsubara_rounding(eta, temperature);
    let inv_l = 1.0 / table.sites() as f64;
    let tol = table.degeneracy_tolerance();
    let lhs = table.sum(|p| p.prod * p.weight_diff() * damped_integral(eta, p.omega, t_max)) * inv_l;
    let main = table.sum(|p| p.prod * p.weight_diff() * damped_integral(eta_beta, p.omega, t_max)) * inv_l;
    let euclidean_part = c64::new(0.0, 1.0) * table.matsubara(eta_beta)?;
    let beta = temperature.inverse();
    let err2 = table.sum(|p| {
        let decay = c64::new(-eta_beta * t_max, -p.omega * t_max).exp();
        let weight = if eta_beta == 0.0 && p.omega.abs() <= tol {
            c64::new(beta * p.w_n, 0.0)
        } else {
            -p.weight_diff() / c64::new(p.omega, -eta_beta)
        };
        c64::new(0.0, -1.0) * p.prod * decay * weight
    }) * inv_l;
    let err1 = lhs - main;
    let residual = (lhs - euclidean_part - err1 - err2).norm();
    let scale = [lhs, euclidean_part, err1, err2]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(WickReport {
        lhs,
        euclidean_part,
        err1,
        err2,
        residual,
        scale,
        eta_beta,
    })
}

pub fn wick_decomposition(spec: &SpectralData, eta: f64, p: f64, t_max: f64) -> Result<WickReport> {
    let table = LehmannTable::for_kind(spec, Kind::JJ, p)?;
    wick_from_table(&table, eta, t_max)
}

/// Geometric grid for [`error_scaling_sweep`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingGrid {
    pub etas: Vec<f64>,
    pub betas: Vec<f64>,
    pub times: Vec<f64>,
    pub p: f64,
}

impl ScalingGrid {
    /// `η ∈ {0.4, …, 3.2}`, `β ∈ {16, …, 128}`, `T ∈ {5, …, 40}`, `p = 2π/L`.
    pub fn standard(sites: usize) -> Self {
        ScalingGrid {
            etas: vec![0.4, 0.8, 1.6, 3.2],
            betas: vec![16.0, 32.0, 64.0, 128.0],
            times: vec![5.0, 10.0, 20.0, 40.0],
            p: momentum(1, sites),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub eta: f64,
    pub beta: f64,
    pub time: f64,
    pub eta_beta: f64,
    pub err1: f64,
    pub err2: f64,
    /// `1/(η²β) + e^{−η_β T}`.
    pub envelope: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Points with `η_β = 0` carry no exponential decay and are excluded.
    pub skipped: usize,
    /// `max (|err1| + |err2|)/envelope` over the grid.
    pub constant_fit: f64,
    /// `max(2πF, 2F/η_min)` with `F = (1/L)Σ|w_n − w_m||P_nm|`, maximized over `β`.
    pub constant_apriori: f64,
}

impl ScalingReport {
    pub fn constant_valid(&self) -> bool {
        self.constant_fit <= self.constant_apriori
    }
}

fn base_spectrum(params: &ModelParams) -> Result<SpectralData> {
    diagonalize(params, &SectorSelection::All, Temperature::Finite(1.0))
}

fn commutator_mass(table: &LehmannTable) -> f64 {
    table.sum(|p| c64::new(p.weight_diff().abs() * p.prod.norm(), 0.0)).re / table.sites() as f64
}

/// Evaluates `err1`, `err2` over the grid and measures a single constant `C`
/// with `|err1| + |err2| ≤ C(1/(η²β) + e^{−η_β T})`.
pub fn error_scaling_sweep(params: &ModelParams, grid: &ScalingGrid) -> Result<ScalingReport> {
    if grid.etas.len() < 4 || grid.betas.len() < 4 || grid.times.len() < 4 {
        return Err(Error::InvalidArgument("each grid axis needs at least four points".into()));
    }
    let base = base_spectrum(params)?;
    let eta_min = grid.etas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut points = Vec::new();
    let mut skipped = 0;
    let mut constant_fit: f64 = 0.0;
    let mut constant_apriori: f64 = 0.0;
    for &beta in &grid.betas {
        let spec = base.reweighted(Temperature::beta(beta)?);
        let table = LehmannTable::for_kind(&spec, Kind::JJ, grid.p)?;
        let f = commutator_mass(&table);
        constant_apriori = constant_apriori.max((2.0 * std::f64::consts::PI * f).max(2.0 * f / eta_min));
        for &eta in &grid.etas {
            for &time in &grid.times {
                let w = wick_from_table(&table, eta, time)?;
                if w.eta_beta == 0.0 {
                    skipped += 1;
                    continue;
                }
                let envelope = 1.0 / (eta * eta * beta) + (-w.eta_beta * time).exp();
                let (e1, e2) = (w.err1.norm(), w.err2.norm());
                constant_fit = constant_fit.max((e1 + e2) / envelope);
                points.push(ScalingPoint {
                    eta,
                    beta,
                    time,
                    eta_beta: w.eta_beta,
                    err1: e1,
                    err2: e2,
                    envelope,
                });
            }
        }
    }
    Ok(ScalingReport {
        points,
        skipped,
        constant_fit,
        constant_apriori,
    })
}

/// `max |err1|` over 32 log-spaced `β' ∈ [β, 2β)`; `η_β` jumps with `β`, so the
/// envelope rather than a single value follows the `1/β` law.
pub fn err1_envelope(base: &SpectralData, eta: f64, beta: f64, p: f64, t_max: f64) -> Result<f64> {
    const SAMPLES: usize = 32;
    let mut best: f64 = 0.0;
    for i in 0..SAMPLES {
        let b = beta * 2f64.powf(i as f64 / SAMPLES as f64);
        let spec = base.reweighted(Temperature::beta(b)?);
        best = best.max(wick_decomposition(&spec, eta, p, t_max)?.err1.norm());
    }
    Ok(best)
}

/// `max |err2|` over 65 samples of `T' ∈ [T, T + 2π]`, one full period of the
/// slowest phase `e^{−iωT}` with `|ω| ≥ 1`.
pub fn err2_envelope(table: &LehmannTable, eta: f64, t_max: f64) -> Result<f64> {
    const SAMPLES: usize = 65;
    let mut best: f64 = 0.0;
    for i in 0..SAMPLES {
        let t = t_max + 2.0 * std::f64::consts::PI * i as f64 / (SAMPLES - 1) as f64;
        best = best.max(wick_from_table(table, eta, t)?.err2.norm());
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxisFit {
    pub xs: Vec<f64>,
    pub envelopes: Vec<f64>,
    pub fit: Option<LinearFit>,
    /// Why no fit was produced (flat or non-positive data).
    pub note: Option<String>,
}

fn fit_or_note(xs: &[f64], ys: &[f64]) -> (Option<LinearFit>, Option<String>) {
    match linear_fit(xs, ys) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Log–log slope of the `err1` envelope against `β`, smallest `β` dropped.
pub fn beta_slope_fit(params: &ModelParams, eta: f64, betas: &[f64], p: f64, t_max: f64) -> Result<AxisFit> {
    let base = base_spectrum(params)?;
    let envelopes = betas
        .iter()
        .map(|&b| err1_envelope(&base, eta, b, p, t_max))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..betas.len()).collect();
    order.sort_by(|&a, &b| betas[a].total_cmp(&betas[b]));
    let keep: Vec<usize> = order.into_iter().skip(1).collect();
    let xs: Vec<f64> = keep.iter().map(|&i| betas[i].ln()).collect();
    let ys: Vec<f64> = keep.iter().map(|&i| envelopes[i].ln()).collect();
    let (fit, note) = if keep.iter().any(|&i| !(envelopes[i] > 0.0)) {
        (None, Some("err1 vanishes (η on the Matsubara grid or a conserved current)".into()))
    } else {
        fit_or_note(&xs, &ys)
    };
    Ok(AxisFit {
        xs: betas.to_vec(),
        envelopes,
        fit,
        note,
    })
}

/// Slope of `ln` of the `err2` envelope against `T`; minus the decay rate.
pub fn time_decay_fit(params: &ModelParams, eta: f64, beta: f64, times: &[f64], p: f64) -> Result<AxisFit> {
    let spec = base_spectrum(params)?.reweighted(Temperature::beta(beta)?);
    let table = LehmannTable::for_kind(&spec, Kind::JJ, p)?;
    let envelopes = times
        .iter()
        .map(|&t| err2_envelope(&table, eta, t))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<f64> = envelopes.iter().map(|e| e.ln()).collect();
    let (fit, note) = if envelopes.iter().any(|e| !(*e > 0.0)) {
        (None, Some("err2 vanishes identically".into()))
    } else {
        fit_or_note(times, &ys)
    };
    Ok(AxisFit {
        xs: times.to_vec(),
        envelopes,
        fit,
        note,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundSample {
    pub z: c64,
    pub modulus: f64,
    /// Value at `z = i·Im z`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexBoundReport {
    pub samples: Vec<BoundSample>,
    /// `max(|f(z)| − g(Im z))`, non-positive when the bound holds.
    pub max_violation: f64,
}

impl ComplexBoundReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.samples
            .iter()
            .all(|s| s.modulus <= s.bound + tol * s.bound.max(1.0))
    }
}

/// `|(1/L)⟨ĵ_p(z) ĵ_{−p}⟩| ≤ (1/L)⟨ĵ_p(i Im z) ĵ_{−p}⟩` for every sample.
pub fn complex_bound_probe(spec: &SpectralData, p: f64, zs: &[c64]) -> Result<ComplexBoundReport> {
    let table = LehmannTable::for_kind(spec, Kind::JJ, p)?;
    let mut samples = Vec::with_capacity(zs.len());
    let mut max_violation = f64::NEG_INFINITY;
    for &z in zs {
        if z.im > 0.0 {
            return Err(Error::InvalidArgument(format!("Im z = {} > 0", z.im)));
        }
        let modulus = table.complex_time(z)?.norm();
        let bound = table.complex_time(c64::new(0.0, z.im))?.re;
        max_violation = max_violation.max(modulus - bound);
        samples.push(BoundSample { z, modulus, bound });
    }
    Ok(ComplexBoundReport {
        samples,
        max_violation,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LimitOrderPoint {
    pub eta: f64,
    pub beta: f64,
    pub eta_beta: f64,
    pub canonical: f64,
    pub euclidean: f64,
    /// `|canonical_H(η, T) − euclidean_H(η_β)|`.
    pub diff: f64,
}

/// Gap between the real-time and imaginary-time `H` at the points `(η, β)`.
pub fn limit_order_probe(params: &ModelParams, p: f64, points: &[(f64, f64)], t_max: f64) -> Result<Vec<LimitOrderPoint>> {
    let base = base_spectrum(params)?;
    points
        .iter()
        .map(|&(eta, beta)| {
            let spec = base.reweighted(Temperature::beta(beta)?);
            let eta_beta = matsubara_rounding(eta, spec.temperature());
            let c = canonical_h(&spec, eta, p, t_max)?;
            let e = euclidean_h(&spec, eta_beta, p)?;
            let diff = c64::new(c.value - e.value, c.imag - e.imag).norm();
            Ok(LimitOrderPoint {
                eta,
                beta,
                eta_beta,
                canonical: c.value,
                euclidean: e.value,
                diff,
            })
        })
        .collect()
}
