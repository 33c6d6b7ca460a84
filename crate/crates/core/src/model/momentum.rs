//! Translation-symmetric blocks `(N, k)` of a periodic ring.
//!
//! `T` shifts every particle by one site; a particle leaving site `L−1`
//! re-enters at site 0 in front of the other `N−1` creation operators, which
//! costs the sign `(−1)^{N−1}`. Any seam sign of the Hamiltonian is first
//! spread over all bonds as a uniform phase so that `T` commutes with it.

use faer::{c64, Mat};

use super::basis::{occupied, FockSector};
use super::build::{bond_terms, hamiltonian_terms, Gauge, Terms};
use super::params::ModelParams;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MomentumSector {
    sites: usize,
    particles: usize,
    k: usize,
    reps: Vec<u32>,
    periods: Vec<usize>,
}

fn translate(word: u32, sites: usize, particles: usize) -> (u32, f64) {
    let top = occupied(word, sites - 1);
    let mask = ((1u64 << sites) - 1) as u32;
    let rot = ((word << 1) & mask) | (top as u32);
    let sign = if top && particles % 2 == 0 { -1.0 } else { 1.0 };
    (rot, sign)
}

/// Smallest rotation of `word`, together with `(d, χ)` such that
/// `|word⟩ = χ T^d |rep⟩`.
fn representative(word: u32, sites: usize, particles: usize) -> (u32, usize, f64) {
    let mut best = (word, 0usize, 1.0);
    let mut cur = word;
    let mut sign = 1.0;
    for e in 1..sites {
        let (next, s) = translate(cur, sites, particles);
        cur = next;
        sign *= s;
        if cur < best.0 {
            best = (cur, e, sign);
        }
    }
    // T^e |word⟩ = σ |rep⟩ and T^L = 1, hence |word⟩ = σ T^{L−e} |rep⟩.
    let (rep, e, sigma) = best;
    (rep, (sites - e) % sites, sigma)
}

impl MomentumSector {
    /// Block with total momentum `2πk/L`.
    pub fn new(sites: usize, particles: usize, k: usize) -> Result<Self> {
        if k >= sites {
            return Err(Error::InvalidArgument(format!("momentum index {k} ≥ L = {sites}")));
        }
        let sector = FockSector::new(sites, particles)?;
        let mut reps = Vec::new();
        let mut periods = Vec::new();
        for &w in sector.states() {
            let (rep, _, _) = representative(w, sites, particles);
            if rep != w {
                continue;
            }
            let mut cur = w;
            let mut chi = 1.0;
            let mut period = 0;
            for r in 1..=sites {
                let (next, s) = translate(cur, sites, particles);
                cur = next;
                chi *= s;
                if cur == w {
                    period = r;
                    break;
                }
            }
            // Compatible iff e^{−ikR} χ_R = 1, i.e. 2kR ≡ 0 (χ=+1) or L (χ=−1) mod 2L.
            let phase = (2 * k * period) % (2 * sites);
            let ok = if chi > 0.0 { phase == 0 } else { phase == sites };
            if ok {
                reps.push(w);
                periods.push(period);
            }
        }
        Ok(MomentumSector {
            sites,
            particles,
            k,
            reps,
            periods,
        })
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn momentum_index(&self) -> usize {
        self.k
    }

    pub fn representatives(&self) -> &[u32] {
        &self.reps
    }

    pub(crate) fn assemble(&self, terms: &Terms) -> Mat<c64> {
        let d = self.dim();
        let mut m = Mat::<c64>::zeros(d, d);
        let kk = 2.0 * std::f64::consts::PI * self.k as f64 / self.sites as f64;
        let mut buf = Vec::new();
        for (col, &r) in self.reps.iter().enumerate() {
            terms.apply(r, &mut buf);
            for &(img, c) in &buf {
                let (rep, dist, chi) = representative(img, self.sites, self.particles);
                let Ok(row) = self.reps.binary_search(&rep) else {
                    continue;
                };
                let norm = (self.periods[col] as f64 / self.periods[row] as f64).sqrt();
                m[(row, col)] += c * chi * norm * c64::from_polar(1.0, kk * dist as f64);
            }
        }
        m
    }
}

/// Which operator to represent inside a momentum block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Hamiltonian,
    /// `𝒥 = ∂_φ H`.
    TotalCurrent,
    /// `Δ = −∂²_φ H`.
    Kinetic,
}

/// Dense matrix of a translation-invariant operator in block `(N, k)`.
pub fn momentum_block(params: &ModelParams, sector: &MomentumSector, kind: BlockKind) -> Result<Mat<c64>> {
    params.validate()?;
    if !params.is_periodic() {
        return Err(Error::NotApplicable("momentum blocks need a periodic ring".into()));
    }
    if sector.sites != params.sites {
        return Err(Error::Dimension(format!(
            "block has {} sites, parameters have {}",
            sector.sites, params.sites
        )));
    }
    let n = sector.particles;
    let all: Vec<(usize, c64)> = (0..params.sites).map(|x| (x, c64::new(1.0, 0.0))).collect();
    let j = params.hopping;
    let terms = match kind {
        BlockKind::Hamiltonian => hamiltonian_terms(params, n, Gauge::Uniform),
        BlockKind::TotalCurrent => bond_terms(
            params,
            n,
            &all,
            c64::new(0.0, -j / 2.0),
            c64::new(0.0, j / 2.0),
            Gauge::Uniform,
        ),
        BlockKind::Kinetic => bond_terms(
            params,
            n,
            &all,
            c64::new(-j / 2.0, 0.0),
            c64::new(-j / 2.0, 0.0),
            Gauge::Uniform,
        ),
    };
    Ok(sector.assemble(&terms))
}
