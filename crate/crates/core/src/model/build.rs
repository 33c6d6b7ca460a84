use std::f64::consts::PI;

use faer::c64;

use super::basis::{apply_hop, occupied, FockSector};
use super::operator::{block_from_triplets, BlockOperator, SparseBlock};
use super::params::{momentum, momentum_index, ModelParams};
use crate::error::{Error, Result};

/// Where the fermionic seam sign of a twisted ring is placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Gauge {
    /// On bond `L−1 → 0` only.
    Seam,
    /// Spread over all bonds as a uniform extra phase `π/L`.
    Uniform,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Hop {
    pub to: usize,
    pub from: usize,
    pub coef: c64,
}

type DiagFn = Box<dyn Fn(u32) -> c64 + Send + Sync>;

/// Second-quantized operator as a list of `a†_i a_j` terms plus a diagonal part.
pub(crate) struct Terms {
    pub hops: Vec<Hop>,
    pub diag: Option<DiagFn>,
}

impl Terms {
    pub fn apply(&self, word: u32, out: &mut Vec<(u32, c64)>) {
        out.clear();
        if let Some(d) = &self.diag {
            let v = d(word);
            if v != c64::new(0.0, 0.0) {
                out.push((word, v));
            }
        }
        for h in &self.hops {
            if let Some((w, s)) = apply_hop(word, h.to, h.from) {
                out.push((w, h.coef * s));
            }
        }
    }

    pub fn assemble(&self, sector: &FockSector) -> SparseBlock {
        let mut entries = Vec::new();
        let mut buf = Vec::new();
        for (col, &w) in sector.states().iter().enumerate() {
            self.apply(w, &mut buf);
            for &(img, v) in &buf {
                let row = sector.index_of(img).expect("number-conserving term");
                entries.push((row, col, v));
            }
        }
        block_from_triplets(sector.dim(), sector.dim(), &entries)
    }
}

fn check_sector(params: &ModelParams, sector: &FockSector) -> Result<()> {
    if sector.sites() != params.sites {
        return Err(Error::Dimension(format!(
            "sector has {} sites, parameters have {}",
            sector.sites(),
            params.sites
        )));
    }
    Ok(())
}

pub(crate) fn bonds(params: &ModelParams) -> usize {
    if params.is_periodic() {
        params.sites
    } else {
        params.sites - 1
    }
}

/// Phase `e^{iφ}` (times the seam sign) of `a†_x a_{x+1}` on bond `x` in sector `n`.
pub(crate) fn bond_phase(params: &ModelParams, n: usize, x: usize, gauge: Gauge) -> c64 {
    let sign = params.seam_sign(n);
    match gauge {
        Gauge::Seam => {
            let s = if x + 1 == params.sites { sign } else { 1.0 };
            c64::from_polar(s, params.flux)
        }
        Gauge::Uniform => {
            let extra = if sign < 0.0 { PI / params.sites as f64 } else { 0.0 };
            c64::from_polar(1.0, params.flux + extra)
        }
    }
}

/// Bond operator family: `Σ_x w_x [f e^{iφ} a†_x a_{x+1} + b e^{−iφ} a†_{x+1} a_x]`.
pub(crate) fn bond_terms(
    params: &ModelParams,
    n: usize,
    weights: &[(usize, c64)],
    forward: c64,
    backward: c64,
    gauge: Gauge,
) -> Terms {
    let l = params.sites;
    let mut hops = Vec::with_capacity(2 * weights.len());
    for &(x, w) in weights {
        let y = (x + 1) % l;
        let ph = bond_phase(params, n, x, gauge);
        hops.push(Hop {
            to: x,
            from: y,
            coef: w * forward * ph,
        });
        hops.push(Hop {
            to: y,
            from: x,
            coef: w * backward * ph.conj(),
        });
    }
    Terms { hops, diag: None }
}

pub(crate) fn hamiltonian_terms(params: &ModelParams, n: usize, gauge: Gauge) -> Terms {
    let j = params.hopping;
    let all: Vec<(usize, c64)> = (0..bonds(params)).map(|x| (x, c64::new(1.0, 0.0))).collect();
    let mut terms = bond_terms(
        params,
        n,
        &all,
        c64::new(-j / 2.0, 0.0),
        c64::new(-j / 2.0, 0.0),
        gauge,
    );
    let p = params.clone();
    terms.diag = Some(Box::new(move |w| c64::new(diagonal_energy(&p, w), 0.0)));
    terms
}

/// Density-density and field part of the Hamiltonian on a basis word.
pub(crate) fn diagonal_energy(p: &ModelParams, w: u32) -> f64 {
    let l = p.sites;
    let s = |x: usize| if occupied(w, x) { 0.5 } else { -0.5 };
    let periodic = p.is_periodic();
    let mut e = 0.0;
    for x in 0..bonds(p) {
        e -= p.anisotropy * s(x) * s((x + 1) % l);
    }
    let c = p.field_coefficient();
    if c != 0.0 {
        e += c * (0..l).map(s).sum::<f64>();
    }
    if p.epsilon != 0.0 {
        for cpl in &p.couplings {
            let r = cpl.range;
            let mut acc = 0.0;
            for x in 0..l {
                let sx = s(x);
                if periodic {
                    acc += sx * (s((x + r) % l) + s((x + l - r) % l));
                } else {
                    if x + r < l {
                        acc += sx * s(x + r);
                    }
                    if x >= r {
                        acc += sx * s(x - r);
                    }
                }
            }
            e -= p.epsilon * cpl.value * acc;
        }
    }
    e
}

fn current_coeffs(j: f64) -> (c64, c64) {
    (c64::new(0.0, -j / 2.0), c64::new(0.0, j / 2.0))
}

fn kinetic_coeffs(j: f64) -> (c64, c64) {
    (c64::new(-j / 2.0, 0.0), c64::new(-j / 2.0, 0.0))
}

fn check_bond(params: &ModelParams, x: usize) -> Result<()> {
    if x >= params.sites {
        return Err(Error::InvalidArgument(format!("site {x} outside 0..{}", params.sites)));
    }
    if x >= bonds(params) {
        return Err(Error::NotApplicable(format!(
            "bond {x} → {} does not exist on an open chain",
            x + 1
        )));
    }
    Ok(())
}

fn fourier_weights(params: &ModelParams, p: f64) -> Result<Vec<(usize, c64)>> {
    let m = momentum_index(p, params.sites)?;
    let pe = momentum(m, params.sites);
    Ok((0..params.sites)
        .map(|x| (x, c64::from_polar(1.0, -pe * x as f64)))
        .collect())
}

fn assemble_all(
    name: &str,
    hermitian: bool,
    params: &ModelParams,
    sectors: &[FockSector],
    make: impl Fn(usize) -> Terms,
) -> Result<BlockOperator> {
    params.validate()?;
    let mut op = BlockOperator::new(name, hermitian);
    for s in sectors {
        check_sector(params, s)?;
        let terms = make(s.particles());
        op.insert(s.particles(), s.particles(), terms.assemble(s));
    }
    Ok(op)
}

pub fn build_hamiltonian(params: &ModelParams, sectors: &[FockSector]) -> Result<BlockOperator> {
    assemble_all("H", true, params, sectors, |n| {
        hamiltonian_terms(params, n, Gauge::Seam)
    })
}

pub fn build_density(params: &ModelParams, x: usize, sectors: &[FockSector]) -> Result<BlockOperator> {
    if x >= params.sites {
        return Err(Error::InvalidArgument(format!("site {x} outside 0..{}", params.sites)));
    }
    assemble_all(&format!("rho_{x}"), true, params, sectors, |_| Terms {
        hops: Vec::new(),
        diag: Some(Box::new(move |w| {
            c64::new(if occupied(w, x) { 1.0 } else { 0.0 }, 0.0)
        })),
    })
}

/// `ρ̂_p = Σ_x e^{−ipx} ρ_x`.
pub fn build_density_fourier(
    params: &ModelParams,
    p: f64,
    sectors: &[FockSector],
) -> Result<BlockOperator> {
    let weights = fourier_weights(params, p)?;
    let hermitian = 2 * momentum_index(p, params.sites)? % params.sites == 0;
    assemble_all("rho_p", hermitian, params, sectors, |_| {
        let w = weights.clone();
        Terms {
            hops: Vec::new(),
            diag: Some(Box::new(move |word| {
                w.iter()
                    .filter(|(x, _)| occupied(word, *x))
                    .map(|(_, c)| *c)
                    .sum()
            })),
        }
    })
}

/// `j_x = (iJ/2)(e^{−iφ} a†_{x+1} a_x − e^{iφ} a†_x a_{x+1})`.
pub fn build_current(params: &ModelParams, x: usize, sectors: &[FockSector]) -> Result<BlockOperator> {
    check_bond(params, x)?;
    let (f, b) = current_coeffs(params.hopping);
    assemble_all(&format!("j_{x}"), true, params, sectors, |n| {
        bond_terms(params, n, &[(x, c64::new(1.0, 0.0))], f, b, Gauge::Seam)
    })
}

/// `ĵ_p = Σ_x e^{−ipx} j_x` over existing bonds.
pub fn build_current_fourier(
    params: &ModelParams,
    p: f64,
    sectors: &[FockSector],
) -> Result<BlockOperator> {
    let mut weights = fourier_weights(params, p)?;
    weights.truncate(bonds(params));
    let hermitian = 2 * momentum_index(p, params.sites)? % params.sites == 0;
    let (f, b) = current_coeffs(params.hopping);
    assemble_all("j_p", hermitian, params, sectors, |n| {
        bond_terms(params, n, &weights, f, b, Gauge::Seam)
    })
}

/// Total current `𝒥 = ĵ_0 = ∂_φ H`.
pub fn build_total_current(params: &ModelParams, sectors: &[FockSector]) -> Result<BlockOperator> {
    build_current_fourier(params, 0.0, sectors).map(|o| o.rename("J"))
}

/// Kinetic energy `Δ = Σ_x Δ_x`, with the flux dressing of the Hamiltonian.
pub fn build_kinetic(params: &ModelParams, sectors: &[FockSector]) -> Result<BlockOperator> {
    let all: Vec<(usize, c64)> = (0..bonds(params)).map(|x| (x, c64::new(1.0, 0.0))).collect();
    let (f, b) = kinetic_coeffs(params.hopping);
    assemble_all("Delta", true, params, sectors, |n| {
        bond_terms(params, n, &all, f, b, Gauge::Seam)
    })
}

/// `Δ_x = −(J/2)(e^{iφ} a†_x a_{x+1} + h.c.)`.
pub fn build_kinetic_site(params: &ModelParams, x: usize, sectors: &[FockSector]) -> Result<BlockOperator> {
    check_bond(params, x)?;
    let (f, b) = kinetic_coeffs(params.hopping);
    assemble_all(&format!("Delta_{x}"), true, params, sectors, |n| {
        bond_terms(params, n, &[(x, c64::new(1.0, 0.0))], f, b, Gauge::Seam)
    })
}

/// Position operator `𝒳 = Σ_x x ρ_x`; only meaningful on an open chain.
pub fn build_position(params: &ModelParams, sectors: &[FockSector]) -> Result<BlockOperator> {
    if params.is_periodic() {
        return Err(Error::NotApplicable(
            "the position operator needs an open chain".into(),
        ));
    }
    assemble_all("X", true, params, sectors, |_| Terms {
        hops: Vec::new(),
        diag: Some(Box::new(|w| {
            let mut acc = 0.0;
            let mut word = w;
            while word != 0 {
                let x = word.trailing_zeros();
                acc += x as f64;
                word &= word - 1;
            }
            c64::new(acc, 0.0)
        })),
    })
}

/// `‖i[H, ρ_x] + (j_x − j_{x−1})‖`, largest singular value over the given sectors.
pub fn continuity_residual(params: &ModelParams, sectors: &[FockSector], x: usize) -> Result<f64> {
    params.validate()?;
    let l = params.sites;
    if !params.is_periodic() && (x == 0 || x + 1 >= l) {
        return Err(Error::NotApplicable(format!(
            "site {x} is an open edge where the lattice divergence is truncated"
        )));
    }
    let h = build_hamiltonian(params, sectors)?;
    let rho = build_density(params, x, sectors)?;
    let jx = build_current(params, x, sectors)?;
    let jm = build_current(params, (x + l - 1) % l, sectors)?;
    let comm = BlockOperator::commutator(&h, &rho)?;
    let residual = comm
        .scale(c64::new(0.0, 1.0))
        .add_scaled(c64::new(1.0, 0.0), &jx)?
        .add_scaled(c64::new(-1.0, 0.0), &jm)?;
    residual.spectral_norm()
}
