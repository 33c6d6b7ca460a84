//! Two-point functions in the Lehmann representation.
//!
//! Every object is a double sum over eigenpairs `(n, m)` of one sector with
//! `ω = E_n − E_m` and the product `P_nm = A_nm B_mn`; all time and
//! frequency integrals are done in closed form per pair.

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    build_current_fourier, build_density_fourier, momentum, momentum_index, BlockOperator,
    FockSector,
};
use crate::spectra::{thermal_expectation, SpectralData, Temperature};

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// Which densities enter `⟨ô_{μ,p} ; ô_{ν,−p}⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// current–current
    JJ,
    /// density–density
    RhoRho,
    /// `ĵ_p` with `ρ̂_{−p}`
    JRho,
    /// `ρ̂_p` with `ĵ_{−p}`
    RhoJ,
}

impl Kind {
    pub fn from_indices(mu: usize, nu: usize) -> Result<Kind> {
        match (mu, nu) {
            (0, 0) => Ok(Kind::RhoRho),
            (0, 1) => Ok(Kind::RhoJ),
            (1, 0) => Ok(Kind::JRho),
            (1, 1) => Ok(Kind::JJ),
            _ => Err(Error::InvalidArgument(format!("component indices ({mu}, {nu})"))),
        }
    }

    fn components(self) -> (usize, usize) {
        match self {
            Kind::RhoRho => (0, 0),
            Kind::RhoJ => (0, 1),
            Kind::JRho => (1, 0),
            Kind::JJ => (1, 1),
        }
    }
}

pub(crate) fn fock_sectors(spec: &SpectralData) -> Vec<FockSector> {
    spec.sectors().iter().map(|s| s.sector.clone()).collect()
}

/// `ô_{μ,p}` for `μ = 0` (density) or `μ = 1` (current).
pub fn fourier_component(spec: &SpectralData, mu: usize, p: f64) -> Result<BlockOperator> {
    let sectors = fock_sectors(spec);
    match mu {
        0 => build_density_fourier(spec.params(), p, &sectors),
        1 => build_current_fourier(spec.params(), p, &sectors),
        _ => Err(Error::InvalidArgument(format!("component {mu}"))),
    }
}

/// Operators `(ô_{μ,p}, ô_{ν,−p})` of a correlator kind.
pub fn kind_operators(spec: &SpectralData, kind: Kind, p: f64) -> Result<(BlockOperator, BlockOperator)> {
    let l = spec.sites();
    let m = momentum_index(p, l)?;
    let (mu, nu) = kind.components();
    let a = fourier_component(spec, mu, momentum(m, l))?;
    let b = fourier_component(spec, nu, momentum((l - m) % l, l))?;
    Ok((a, b))
}

/// Checks `p0 ∈ (2π/β)ℤ`; any real `p0` is admissible at `β = ∞`.
pub fn matsubara_index(p0: f64, temperature: Temperature) -> Result<i64> {
    match temperature {
        Temperature::Zero => Ok(0),
        Temperature::Finite(beta) => {
            let m = p0 * beta / (2.0 * std::f64::consts::PI);
            let r = m.round();
            if !m.is_finite() || (m - r).abs() > 1e-9 * r.abs().max(1.0) {
                return Err(Error::MatsubaraGrid { p0, beta });
            }
            Ok(r as i64)
        }
    }
}

/// Closest Matsubara frequency to `eta` (identity at `β = ∞`).
pub fn matsubara_rounding(eta: f64, temperature: Temperature) -> f64 {
    match temperature {
        Temperature::Zero => eta,
        Temperature::Finite(beta) => {
            let g = 2.0 * std::f64::consts::PI / beta;
            g * (eta / g).round()
        }
    }
}

/// `∫_{−T}^0 e^{ηt} e^{iωt} dt = (1 − e^{−(η+iω)T})/(η+iω)`; `T = ∞` allowed for `η > 0`.
pub fn damped_integral(eta: f64, omega: f64, t_max: f64) -> c64 {
    let z = c64::new(eta, omega);
    if t_max.is_infinite() {
        return z.inv();
    }
    let zt = z * t_max;
    if zt.norm() < 1e-5 {
        return (c64::new(1.0, 0.0) - zt / 2.0 + zt * zt / 6.0) * t_max;
    }
    (c64::new(1.0, 0.0) - (-zt).exp()) / z
}

#[derive(Clone, Copy, Debug)]
pub struct TableOptions {
    /// Pairs with `max(w_n, w_m)·|A_nm B_mn|` at or below this are dropped.
    pub threshold: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { threshold: 1e-14 }
    }
}

/// One Lehmann pair as seen by a kernel.
#[derive(Clone, Copy, Debug)]
pub struct Pair {
    pub e_n: f64,
    pub e_m: f64,
    /// `E_n − E_m`.
    pub omega: f64,
    pub w_n: f64,
    pub w_m: f64,
    pub lw_n: f64,
    pub lw_m: f64,
    /// `A_nm B_mn`.
    pub prod: c64,
    beta: f64,
}

impl Pair {
    /// `w_n − w_m` without cancellation for nearly degenerate pairs.
    pub fn weight_diff(&self) -> f64 {
        if self.beta.is_infinite() {
            return self.w_n - self.w_m;
        }
        let x = self.beta * self.omega;
        if self.omega > 0.0 {
            self.w_m * (-x).exp_m1()
        } else if self.omega < 0.0 {
            -self.w_n * x.exp_m1()
        } else {
            0.0
        }
    }
}

struct PairBlock {
    energies: Vec<f64>,
    lw: Vec<f64>,
    w: Vec<f64>,
    prod: Vec<c64>,
}

impl PairBlock {
    fn pair(&self, n: usize, m: usize, beta: f64) -> Pair {
        let d = self.energies.len();
        Pair {
            e_n: self.energies[n],
            e_m: self.energies[m],
            omega: self.energies[n] - self.energies[m],
            w_n: self.w[n],
            w_m: self.w[m],
            lw_n: self.lw[n],
            lw_m: self.lw[m],
            prod: self.prod[n * d + m],
            beta,
        }
    }
}

/// Retained Lehmann pairs of `(A, B)` with Gibbs weights.
pub struct LehmannTable {
    sites: usize,
    temperature: Temperature,
    norm: f64,
    blocks: Vec<PairBlock>,
    threshold: f64,
    dropped_mass: f64,
    dropped_count: usize,
    retained_count: usize,
}

/// Split Matsubara sum: `value = regular + β·static_part`.
#[derive(Clone, Copy, Debug)]
pub struct MatsubaraParts {
    pub regular: c64,
    pub static_part: c64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub threshold: f64,
    pub dropped_mass: f64,
    pub dropped_pairs: usize,
    pub retained_pairs: usize,
}

impl LehmannTable {
    pub fn new(spec: &SpectralData, a: &BlockOperator, b: &BlockOperator) -> Result<Self> {
        Self::with_options(spec, a, b, TableOptions::default())
    }

    pub fn with_options(
        spec: &SpectralData,
        a: &BlockOperator,
        b: &BlockOperator,
        options: TableOptions,
    ) -> Result<Self> {
        let pa = spec.project(a)?;
        let pb = spec.project(b)?;
        let threshold = options.threshold;
        let mut blocks = Vec::with_capacity(pa.len());
        let mut dropped_mass = 0.0;
        let mut dropped_count = 0;
        let mut retained_count = 0;
        for (si, s) in spec.sectors().iter().enumerate() {
            let d = s.energies.len();
            let w = spec.weights(si).to_vec();
            let (ma, mb) = (&pa[si], &pb[si]);
            let mut prod = vec![ZERO; d * d];
            for n in 0..d {
                for m in 0..d {
                    let p = ma[(n, m)] * mb[(m, n)];
                    let mag = w[n].max(w[m]) * p.norm();
                    if mag <= threshold {
                        dropped_mass += mag;
                        if p != ZERO {
                            dropped_count += 1;
                        }
                    } else {
                        prod[n * d + m] = p;
                        retained_count += 1;
                    }
                }
            }
            blocks.push(PairBlock {
                energies: s.energies.clone(),
                lw: spec.log_weights(si).to_vec(),
                w,
                prod,
            });
        }
        Ok(LehmannTable {
            sites: spec.sites(),
            temperature: spec.temperature(),
            norm: spec.norm(),
            blocks,
            threshold,
            dropped_mass,
            dropped_count,
            retained_count,
        })
    }

    /// Table of `(ô_{μ,p}, ô_{ν,−p})`.
    pub fn for_kind(spec: &SpectralData, kind: Kind, p: f64) -> Result<Self> {
        let (a, b) = kind_operators(spec, kind, p)?;
        Self::new(spec, &a, &b)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    pub fn truncation(&self) -> TruncationReport {
        TruncationReport {
            threshold: self.threshold,
            dropped_mass: self.dropped_mass,
            dropped_pairs: self.dropped_count,
            retained_pairs: self.retained_count,
        }
    }

    /// `|ω| ≤ tol` routes to the analytic degenerate branch.
    pub fn degeneracy_tolerance(&self) -> f64 {
        1e-9 * self.norm.max(1.0)
    }

    /// Deterministic pair sum `Σ f(pair)` over retained pairs; rows are
    /// reduced in parallel and then added in a fixed order.
    pub fn sum<F>(&self, f: F) -> c64
    where
        F: Fn(&Pair) -> c64 + Sync,
    {
        let beta = self.temperature.inverse();
        let rows: Vec<(usize, usize)> = self
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(s, b)| (0..b.energies.len()).map(move |n| (s, n)))
            .collect();
        let partial: Vec<c64> = rows
            .par_iter()
            .map(|&(s, n)| {
                let b = &self.blocks[s];
                let d = b.energies.len();
                let row = &b.prod[n * d..(n + 1) * d];
                let mut acc = ZERO;
                for (m, &prod) in row.iter().enumerate() {
                    if prod == ZERO {
                        continue;
                    }
                    acc += f(&b.pair(n, m, beta));
                }
                acc
            })
            .collect();
        partial.iter().fold(ZERO, |a, b| a + b)
    }

    /// Largest value of `f` over retained pairs.
    pub fn max_over<F>(&self, f: F) -> f64
    where
        F: Fn(&Pair) -> f64 + Sync,
    {
        let beta = self.temperature.inverse();
        let mut best = f64::NEG_INFINITY;
        for b in &self.blocks {
            let d = b.energies.len();
            for n in 0..d {
                for m in 0..d {
                    if b.prod[n * d + m] != ZERO {
                        best = best.max(f(&b.pair(n, m, beta)));
                    }
                }
            }
        }
        best
    }

    fn inv_l(&self) -> f64 {
        1.0 / self.sites as f64
    }

    /// `(1/L) Σ w_n P_nm e^{izω}`.
    pub fn complex_time(&self, z: c64) -> Result<c64> {
        let y = z.im;
        let worst = self.max_over(|p| p.lw_n - y * p.omega);
        if worst > 700.0 {
            return Err(Error::Overflow(worst));
        }
        Ok(self.sum(|p| {
            let re = p.lw_n - y * p.omega;
            p.prod * c64::from_polar(re.exp(), z.re * p.omega)
        }) * self.inv_l())
    }

    /// `(1/L)⟨[A(t), B]⟩ = (1/L) Σ (w_n − w_m) P_nm e^{iωt}`.
    pub fn commutator(&self, t: f64) -> c64 {
        self.sum(|p| p.prod * p.weight_diff() * c64::from_polar(1.0, p.omega * t)) * self.inv_l()
    }

    /// `(1/L) ∫_{−T}^0 e^{ηt} ⟨[A(t), B]⟩ dt`.
    pub fn damped_commutator_integral(&self, eta: f64, t_max: f64) -> c64 {
        self.sum(|p| p.prod * p.weight_diff() * damped_integral(eta, p.omega, t_max)) * self.inv_l()
    }

    /// `(1/L) ∫_{−T}^0 e^{−iηt} ⟨[A(t), B]⟩ dt`.
    pub fn oscillatory_commutator_integral(&self, eta: f64, t_max: f64) -> c64 {
        self.sum(|p| p.prod * p.weight_diff() * damped_integral(0.0, p.omega - eta, t_max))
            * self.inv_l()
    }

    /// `(1/L) ∫_0^β e^{−ip0 τ} ⟨A(−iτ) B⟩ dτ` split into regular and `β`-proportional parts.
    pub fn matsubara_parts(&self, p0: f64) -> MatsubaraParts {
        let tol = self.degeneracy_tolerance();
        let is_static = p0 == 0.0;
        let regular = self.sum(|p| {
            if p.omega.abs() <= tol {
                ZERO
            } else {
                -p.prod * p.weight_diff() / c64::new(p.omega, -p0)
            }
        });
        let static_part = if is_static {
            self.sum(|p| {
                if p.omega.abs() <= tol {
                    p.prod * p.w_n
                } else {
                    ZERO
                }
            })
        } else {
            ZERO
        };
        MatsubaraParts {
            regular: regular * self.inv_l(),
            static_part: static_part * self.inv_l(),
        }
    }

    /// Non-connected `(1/L)∫_0^β e^{−ip0τ}⟨A(−iτ)B⟩dτ`.
    pub fn matsubara(&self, p0: f64) -> Result<c64> {
        let parts = self.matsubara_parts(p0);
        combine(parts, self.temperature, "static part of a Matsubara sum")
    }
}

fn combine(parts: MatsubaraParts, temperature: Temperature, what: &str) -> Result<c64> {
    match temperature {
        Temperature::Finite(beta) => Ok(parts.regular + parts.static_part * beta),
        Temperature::Zero => {
            let scale = parts.regular.norm().max(1.0);
            if parts.static_part.norm() > 1e-10 * scale {
                Err(Error::Divergent(format!(
                    "{what} has weight {:.3e} on degenerate pairs",
                    parts.static_part.norm()
                )))
            } else {
                Ok(parts.regular)
            }
        }
    }
}

/// `(1/L)⟨[ĵ_p(t), ĵ_{−p}]⟩`.
pub fn realtime_commutator(spec: &SpectralData, p: f64, t: f64) -> Result<c64> {
    Ok(LehmannTable::for_kind(spec, Kind::JJ, p)?.commutator(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexTimeDomain {
    /// `−β ≤ Im z ≤ 0`.
    Strip,
    /// Any `z`, guarded only against overflow.
    Any,
}

/// `(1/L)⟨ĵ_p(z) ĵ_{−p}⟩ = (1/L) Σ w_n J_nm J'_mn e^{izω}`.
pub fn complex_time_correlator(
    spec: &SpectralData,
    p: f64,
    z: c64,
    domain: ComplexTimeDomain,
) -> Result<c64> {
    if domain == ComplexTimeDomain::Strip && (z.im > 0.0 || z.im < -spec.beta()) {
        return Err(Error::InvalidArgument(format!(
            "Im z = {} outside [−β, 0]",
            z.im
        )));
    }
    LehmannTable::for_kind(spec, Kind::JJ, p)?.complex_time(z)
}

/// Connected `(1/L)⟨T ô_{μ,p} ; ô_{ν,−p}⟩` at Matsubara frequency `p0`.
pub fn matsubara_correlator(spec: &SpectralData, kind: Kind, p: f64, p0: f64) -> Result<c64> {
    matsubara_index(p0, spec.temperature())?;
    let (a, b) = kind_operators(spec, kind, p)?;
    let table = LehmannTable::new(spec, &a, &b)?;
    connected_matsubara(spec, &table, &a, &b, p0)
}

/// Connected Matsubara value from a prepared table of `(a, b)`.
pub fn connected_matsubara(
    spec: &SpectralData,
    table: &LehmannTable,
    a: &BlockOperator,
    b: &BlockOperator,
    p0: f64,
) -> Result<c64> {
    let mut parts = table.matsubara_parts(p0);
    if p0 == 0.0 {
        let ea = thermal_expectation(a, spec)?;
        let eb = thermal_expectation(b, spec)?;
        parts.static_part -= ea * eb / spec.sites() as f64;
    }
    combine(parts, spec.temperature(), "connected static correlator")
}

/// Kubo scalar product `∫_0^β ⟨A(−ix₀) B⟩ dx₀` (no connected subtraction).
pub fn kubo_inner(spec: &SpectralData, a: &BlockOperator, b: &BlockOperator) -> Result<c64> {
    let table = LehmannTable::new(spec, a, b)?;
    let parts = table.matsubara_parts(0.0);
    let l = spec.sites() as f64;
    let parts = MatsubaraParts {
        regular: parts.regular * l,
        static_part: parts.static_part * l,
    };
    combine(parts, spec.temperature(), "Kubo product")
}
