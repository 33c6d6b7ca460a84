//! Ground-state curvatures: twist (flux) Drude weight and field susceptibility.
//!
//! Periodic rings are handled in momentum blocks `(N, k)`; a flux keeps `k`
//! a good quantum number, so `E₀(φ)` is followed along the block that holds
//! the ground state at the base flux.

use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use super::result::{Formulation, Meta, TransportResult};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, momentum_block, BlockKind, FockSector, ModelParams, MomentumSector};
use crate::spectra::{hermitian_eigen, hermitian_eigenvalues};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistMethod {
    FiniteDifference,
    Perturbation2,
}

#[derive(Clone, Copy, Debug)]
pub struct TwistOptions {
    /// Particle number; half filling when `None`.
    pub particles: Option<usize>,
    /// Base step `φ₀` of the five-point stencil (Richardson uses `φ₀` and `φ₀/2`).
    pub step: f64,
}

impl Default for TwistOptions {
    fn default() -> Self {
        TwistOptions {
            particles: None,
            step: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMethod {
    /// `−Δn² / (L·[E(N+Δn) + E(N−Δn) − 2E(N)])`, the curvature of the
    /// Legendre transform of the sector ground energies.
    SectorLegendre { delta_n: usize },
    /// Five-point stencil of the global ground energy in the probe field.
    FiniteDifference,
    /// Second-order perturbation theory in the probe field.
    Perturbation2,
}

#[derive(Clone, Copy, Debug)]
pub struct FieldOptions {
    pub particles: Option<usize>,
    pub step: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions {
            particles: None,
            step: 1e-3,
        }
    }
}

fn wrap_angle(phi: f64) -> f64 {
    (phi + PI).rem_euclid(2.0 * PI) - PI
}

fn degeneracy_tol(norm: f64) -> f64 {
    (1e-12 * norm).max(1e-10)
}

struct Branch {
    k: usize,
    energy: f64,
    degeneracy: usize,
}

fn block_eigenvalues(params: &ModelParams, n: usize, k: usize) -> Result<Vec<f64>> {
    let sector = MomentumSector::new(params.sites, n, k)?;
    if sector.dim() == 0 {
        return Ok(Vec::new());
    }
    hermitian_eigenvalues(&momentum_block(params, &sector, BlockKind::Hamiltonian)?)
}

fn ground_branch(params: &ModelParams, n: usize) -> Result<Branch> {
    let mut all = Vec::new();
    for k in 0..params.sites {
        for e in block_eigenvalues(params, n, k)? {
            all.push((e, k));
        }
    }
    let (energy, k) = all
        .iter()
        .copied()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Dimension(format!("sector N = {n} is empty")))?;
    let norm = all.iter().map(|(e, _)| e.abs()).fold(0.0, f64::max);
    let tol = degeneracy_tol(norm);
    let degeneracy = all.iter().filter(|(e, _)| *e - energy <= tol).count();
    Ok(Branch {
        k,
        energy,
        degeneracy,
    })
}

/// Lowest energy in sector `N`.
pub fn sector_ground_energy(params: &ModelParams, n: usize) -> Result<f64> {
    params.validate()?;
    if params.is_periodic() {
        return Ok(ground_branch(params, n)?.energy);
    }
    let sector = FockSector::new(params.sites, n)?;
    let h = build_hamiltonian(params, std::slice::from_ref(&sector))?;
    let e = hermitian_eigenvalues(&h.to_dense(n).expect("block present"))?;
    Ok(e[0])
}

fn branch_energy(params: &ModelParams, n: usize, k: usize) -> Result<f64> {
    Ok(block_eigenvalues(params, n, k)?[0])
}

fn stencil(f: &dyn Fn(f64) -> Result<f64>, h: f64) -> Result<(f64, f64)> {
    let f0 = f(0.0)?;
    let (p1, m1, p2, m2) = (f(h)?, f(-h)?, f(2.0 * h)?, f(-2.0 * h)?);
    let second = (-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h);
    let odd = (p1 - m1).abs().max((p2 - m2).abs());
    Ok((second, odd))
}

/// Five-point second derivative at steps `h` and `h/2`, combined by Richardson.
fn richardson(f: &dyn Fn(f64) -> Result<f64>, h: f64) -> Result<(f64, f64)> {
    let (d1, o1) = stencil(f, h)?;
    let (d2, o2) = stencil(f, h / 2.0)?;
    Ok(((16.0 * d2 - d1) / 15.0, o1.max(o2)))
}

fn check_ring(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if !params.is_periodic() {
        return Err(Error::NotApplicable("a flux needs a periodic ring".into()));
    }
    Ok(())
}

fn base_meta(params: &ModelParams, method: String) -> Meta {
    Meta {
        sites: params.sites,
        beta: None,
        method,
        params_hash: params.hash(),
        ..Default::default()
    }
}

/// Second-order Rayleigh–Schrödinger curvature `⟨∂²H⟩ − 2Σ|⟨n|∂H|0⟩|²/(E_n−E₀)`
/// in the block of the ground state.
fn perturbative_curvature(h: &Mat<c64>, first: &Mat<c64>, second_expect: &dyn Fn(&[c64]) -> f64) -> Result<f64> {
    let (e, v) = hermitian_eigen(h)?;
    let norm = e.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if e.len() > 1 && e[1] - e[0] <= degeneracy_tol(norm) {
        return Err(Error::DegenerateGround(2));
    }
    let v0: Vec<c64> = (0..v.nrows()).map(|i| v[(i, 0)]).collect();
    let d = v.nrows();
    let mut av0 = vec![c64::new(0.0, 0.0); d];
    for j in 0..d {
        for i in 0..d {
            av0[i] += first[(i, j)] * v0[j];
        }
    }
    let mut acc = 0.0;
    for n in 1..d {
        let mut amp = c64::new(0.0, 0.0);
        for i in 0..d {
            amp += v[(i, n)].conj() * av0[i];
        }
        acc += amp.norm_sqr() / (e[n] - e[0]);
    }
    Ok(second_expect(&v0) - 2.0 * acc)
}

fn expectation(m: &Mat<c64>, v: &[c64]) -> f64 {
    let d = v.len();
    let mut acc = c64::new(0.0, 0.0);
    for j in 0..d {
        for i in 0..d {
            acc += v[i].conj() * m[(i, j)] * v[j];
        }
    }
    acc.re
}

/// `D = (1/L) ∂²E₀/∂φ²` at the flux of `params`.
pub fn twist_drude(params: &ModelParams, method: TwistMethod, options: TwistOptions) -> Result<TransportResult> {
    check_ring(params)?;
    let l = params.sites;
    let n = options.particles.unwrap_or(l / 2);
    let branch = ground_branch(params, n)?;
    let mut warnings = Vec::new();
    if branch.degeneracy > 1 {
        if method == TwistMethod::Perturbation2 {
            return Err(Error::DegenerateGround(branch.degeneracy));
        }
        warnings.push(format!(
            "ground state is {}-fold degenerate; curvature of the k-index {} branch",
            branch.degeneracy, branch.k
        ));
    }
    let (value, method_label) = match method {
        TwistMethod::FiniteDifference => {
            let base = params.flux;
            let f = |d: f64| branch_energy(&params.clone().with_flux(wrap_angle(base + d)), n, branch.k);
            let (d2, odd) = richardson(&f, options.step)?;
            if odd > 1e-10 * branch.energy.abs().max(1.0) {
                warnings.push(format!("odd part of E₀(φ) is {odd:.3e}"));
            }
            (d2 / l as f64, format!("finite_difference(step={})", options.step))
        }
        TwistMethod::Perturbation2 => {
            let sector = MomentumSector::new(l, n, branch.k)?;
            let h = momentum_block(params, &sector, BlockKind::Hamiltonian)?;
            let j = momentum_block(params, &sector, BlockKind::TotalCurrent)?;
            let delta = momentum_block(params, &sector, BlockKind::Kinetic)?;
            let curv = perturbative_curvature(&h, &j, &|v0| -expectation(&delta, v0))?;
            (curv / l as f64, "perturbation2".to_string())
        }
    };
    let mut meta = base_meta(params, method_label);
    meta.warnings = warnings;
    Ok(TransportResult {
        value,
        imag: 0.0,
        formulation: Formulation::TwistD,
        meta,
    })
}

fn global_ground(params: &ModelParams) -> Result<(f64, usize)> {
    let mut best = (f64::INFINITY, 0);
    for n in 0..=params.sites {
        let e = sector_ground_energy(params, n)?;
        if e < best.0 {
            best = (e, n);
        }
    }
    Ok(best)
}

/// `κ = (1/L) ∂²E₀/∂h²` for the probe field, or its sector-Legendre estimate.
///
/// Particle number is conserved, so within one sector the probe term is the
/// constant `±h(N − L/2)` and the literal curvature vanishes; the global
/// ground energy is piecewise linear in `h`. `SectorLegendre` measures the
/// curvature of the envelope instead, which carries the finite-size
/// susceptibility. Values follow the literal sign, so they are `≤ 0`.
pub fn field_susceptibility(params: &ModelParams, method: FieldMethod, options: FieldOptions) -> Result<TransportResult> {
    params.validate()?;
    let l = params.sites;
    let n = options.particles.unwrap_or(l / 2);
    let sign = params.probe_sign;
    let mut warnings = Vec::new();
    let (value, label) = match method {
        FieldMethod::SectorLegendre { delta_n } => {
            if delta_n == 0 || delta_n > n || n + delta_n > l {
                return Err(Error::InvalidArgument(format!(
                    "Δn = {delta_n} around N = {n} leaves 0..={l}"
                )));
            }
            let e0 = sector_ground_energy(params, n)?;
            let ep = sector_ground_energy(params, n + delta_n)?;
            let em = sector_ground_energy(params, n - delta_n)?;
            let dn = delta_n as f64;
            let v = -dn * dn / (l as f64 * (ep + em - 2.0 * e0));
            (v, format!("sector_legendre(delta_n={delta_n})"))
        }
        FieldMethod::FiniteDifference => {
            let base = params.probe_field;
            let (_, n0) = global_ground(params)?;
            let crossings = std::cell::Cell::new(0usize);
            let f = |d: f64| {
                let (e, nn) = global_ground(&params.clone().with_probe(base + d, sign))?;
                if nn != n0 {
                    crossings.set(crossings.get() + 1);
                }
                Ok(e)
            };
            let (d2, odd) = richardson(&f, options.step)?;
            if crossings.get() > 0 {
                warnings.push(format!(
                    "ground sector changes at {} stencil points (level crossing)",
                    crossings.get()
                ));
            }
            if odd > 1e-10 {
                warnings.push(format!("odd part of E₀(h) is {odd:.3e}"));
            }
            (d2 / l as f64, format!("finite_difference(step={})", options.step))
        }
        FieldMethod::Perturbation2 => {
            check_ring(params)?;
            let branch = ground_branch(params, n)?;
            let sector = MomentumSector::new(l, n, branch.k)?;
            let h = momentum_block(params, &sector, BlockKind::Hamiltonian)?;
            let c = sign.factor() * (n as f64 - l as f64 / 2.0);
            let d = sector.dim();
            let dh = Mat::<c64>::from_fn(d, d, |i, j| {
                if i == j {
                    c64::new(c, 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            });
            let curv = perturbative_curvature(&h, &dh, &|_| 0.0)?;
            (curv / l as f64, "perturbation2".to_string())
        }
    };
    warnings.push(format!("probe sign {:?}", sign));
    let mut meta = base_meta(params, label);
    meta.warnings = warnings;
    Ok(TransportResult {
        value,
        imag: 0.0,
        formulation: Formulation::FieldKappa,
        meta,
    })
}
