//! Sector-blocked dense diagonalization and Gibbs ensembles.

mod cache;

use std::path::PathBuf;
use std::sync::Arc;

use faer::{c64, Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, BlockOperator, FockSector, ModelParams};

pub use cache::{cache_key, CACHE_ENV, CACHE_VERSION};

/// Inverse temperature; `Zero` is the `β = ∞` ground-multiplet ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    Finite(f64),
    Zero,
}

impl Temperature {
    pub fn beta(beta: f64) -> Result<Self> {
        if beta.is_infinite() && beta > 0.0 {
            return Ok(Temperature::Zero);
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("β = {beta} must be positive")));
        }
        Ok(Temperature::Finite(beta))
    }

    /// `β`, infinite for `Zero`.
    pub fn inverse(self) -> f64 {
        match self {
            Temperature::Finite(b) => b,
            Temperature::Zero => f64::INFINITY,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Temperature::Zero)
    }
}

#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub sector: FockSector,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: Mat<c64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SectorSelection {
    All,
    Particles(Vec<usize>),
}

impl SectorSelection {
    pub fn sectors(&self, sites: usize) -> Result<Vec<FockSector>> {
        match self {
            SectorSelection::All => FockSector::all(sites),
            SectorSelection::Particles(ns) => {
                let mut ns = ns.clone();
                ns.sort_unstable();
                ns.dedup();
                ns.into_iter().map(|n| FockSector::new(sites, n)).collect()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiagOptions {
    pub dim_cap: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for DiagOptions {
    fn default() -> Self {
        DiagOptions {
            dim_cap: 5000,
            cache_dir: None,
        }
    }
}

impl DiagOptions {
    /// Defaults, with the cache directory taken from the environment.
    pub fn from_env() -> Self {
        DiagOptions {
            cache_dir: std::env::var_os(CACHE_ENV).map(PathBuf::from),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// Smallest particle number carrying a ground state.
    pub sector: usize,
    pub sectors: Vec<usize>,
    pub degeneracy: usize,
}

/// Eigen-data of all selected sectors plus Gibbs weights.
#[derive(Clone, Debug)]
pub struct SpectralData {
    params: ModelParams,
    spectra: Arc<Vec<SectorSpectrum>>,
    temperature: Temperature,
    log_weights: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    e_min: f64,
    norm: f64,
    tol_deg: f64,
    ground_degeneracy: usize,
}

pub fn diagonalize(
    params: &ModelParams,
    selection: &SectorSelection,
    temperature: Temperature,
) -> Result<SpectralData> {
    diagonalize_with(params, selection, temperature, &DiagOptions::default())
}

pub fn diagonalize_with(
    params: &ModelParams,
    selection: &SectorSelection,
    temperature: Temperature,
    options: &DiagOptions,
) -> Result<SpectralData> {
    params.validate()?;
    let sectors = selection.sectors(params.sites)?;
    for s in &sectors {
        if s.dim() > options.dim_cap {
            return Err(Error::DimensionCap {
                dim: s.dim(),
                cap: options.dim_cap,
            });
        }
    }
    if let Some(dir) = &options.cache_dir {
        if let Some(spectra) = cache::load(dir, params, &sectors)? {
            return SpectralData::from_parts(params.clone(), spectra, temperature);
        }
    }
    let h = build_hamiltonian(params, &sectors)?;
    let spectra: Vec<SectorSpectrum> = sectors
        .into_par_iter()
        .map(|s| {
            let block = h.block(s.particles()).expect("block built for every sector");
            let (energies, vectors) = hermitian_eigen(&block.to_dense())?;
            Ok(SectorSpectrum {
                sector: s,
                energies,
                vectors,
            })
        })
        .collect::<Result<_>>()?;
    if let Some(dir) = &options.cache_dir {
        cache::store(dir, params, &spectra)?;
    }
    SpectralData::from_parts(params.clone(), spectra, temperature)
}

/// Full eigendecomposition of a Hermitian matrix, ascending eigenvalues.
pub fn hermitian_eigen(m: &Mat<c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let real = (0..n).all(|j| (0..n).all(|i| m[(i, j)].im == 0.0));
    if real {
        let r = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let e = r
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let vals = (0..n).map(|i| e.S()[i]).collect();
        let u = e.U();
        Ok((vals, Mat::from_fn(n, n, |i, j| c64::new(u[(i, j)], 0.0))))
    } else {
        let e = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let vals = (0..n).map(|i| e.S()[i].re).collect();
        Ok((vals, e.U().to_owned()))
    }
}

/// Eigenvalues only.
pub fn hermitian_eigenvalues(m: &Mat<c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

impl SpectralData {
    pub fn from_parts(
        params: ModelParams,
        mut spectra: Vec<SectorSpectrum>,
        temperature: Temperature,
    ) -> Result<Self> {
        if spectra.is_empty() {
            return Err(Error::InvalidArgument("no sectors selected".into()));
        }
        spectra.sort_by_key(|s| s.sector.particles());
        let e_min = spectra
            .iter()
            .flat_map(|s| s.energies.iter().copied())
            .fold(f64::INFINITY, f64::min);
        let norm = spectra
            .iter()
            .flat_map(|s| s.energies.iter().map(|e| e.abs()))
            .fold(0.0, f64::max);
        let tol_deg = (1e-12 * norm).max(1e-10);
        let mut data = SpectralData {
            params,
            spectra: Arc::new(spectra),
            temperature,
            log_weights: Vec::new(),
            weights: Vec::new(),
            e_min,
            norm,
            tol_deg,
            ground_degeneracy: 0,
        };
        data.ground_degeneracy = data
            .spectra
            .iter()
            .map(|s| s.energies.iter().filter(|&&e| e - e_min <= tol_deg).count())
            .sum();
        data.set_weights();
        Ok(data)
    }

    fn set_weights(&mut self) {
        let e_min = self.e_min;
        match self.temperature {
            Temperature::Finite(beta) => {
                let mut z = 0.0;
                for s in self.spectra.iter() {
                    for &e in &s.energies {
                        z += (-beta * (e - e_min)).exp();
                    }
                }
                let lz = z.ln();
                self.log_weights = self
                    .spectra
                    .iter()
                    .map(|s| s.energies.iter().map(|&e| -beta * (e - e_min) - lz).collect())
                    .collect();
            }
            Temperature::Zero => {
                let lg = -(self.ground_degeneracy as f64).ln();
                let tol = self.tol_deg;
                self.log_weights = self
                    .spectra
                    .iter()
                    .map(|s| {
                        s.energies
                            .iter()
                            .map(|&e| if e - e_min <= tol { lg } else { f64::NEG_INFINITY })
                            .collect()
                    })
                    .collect();
            }
        }
        self.weights = self
            .log_weights
            .iter()
            .map(|v| v.iter().map(|l| l.exp()).collect())
            .collect();
    }

    /// Same eigen-data at another temperature.
    pub fn reweighted(&self, temperature: Temperature) -> SpectralData {
        let mut out = self.clone();
        out.temperature = temperature;
        out.set_weights();
        out
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn sites(&self) -> usize {
        self.params.sites
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    pub fn beta(&self) -> f64 {
        self.temperature.inverse()
    }

    pub fn sectors(&self) -> &[SectorSpectrum] {
        &self.spectra
    }

    pub fn weights(&self, sector_index: usize) -> &[f64] {
        &self.weights[sector_index]
    }

    pub fn log_weights(&self, sector_index: usize) -> &[f64] {
        &self.log_weights[sector_index]
    }

    pub fn min_energy(&self) -> f64 {
        self.e_min
    }

    /// `max |E_n|`, the spectral norm of `H` on the selected sectors.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn degeneracy_tolerance(&self) -> f64 {
        self.tol_deg
    }

    pub fn ground_degeneracy(&self) -> usize {
        self.ground_degeneracy
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().flat_map(|w| w.iter()).sum()
    }

    pub fn ground_state(&self) -> GroundState {
        let sectors: Vec<usize> = self
            .spectra
            .iter()
            .filter(|s| s.energies.first().is_some_and(|&e| e - self.e_min <= self.tol_deg))
            .map(|s| s.sector.particles())
            .collect();
        GroundState {
            energy: self.e_min,
            sector: sectors[0],
            sectors,
            degeneracy: self.ground_degeneracy,
        }
    }

    /// `V† A V` for every sector (`A` must be number-conserving).
    pub fn project(&self, a: &BlockOperator) -> Result<Vec<Mat<c64>>> {
        a.ensure_number_conserving()?;
        self.spectra
            .par_iter()
            .map(|s| {
                let n = s.sector.particles();
                let blk = a.block(n).ok_or_else(|| {
                    Error::Dimension(format!("`{}` has no block for sector {n}", a.name()))
                })?;
                let av = blk * &s.vectors;
                Ok(s.vectors.adjoint() * &av)
            })
            .collect()
    }

    /// Diagonal matrix elements `⟨n|A|n⟩` per sector.
    pub fn diagonal_elements(&self, a: &BlockOperator) -> Result<Vec<Vec<c64>>> {
        a.ensure_number_conserving()?;
        self.spectra
            .iter()
            .map(|s| {
                let n = s.sector.particles();
                let blk = a.block(n).ok_or_else(|| {
                    Error::Dimension(format!("`{}` has no block for sector {n}", a.name()))
                })?;
                let av = blk * &s.vectors;
                let d = s.energies.len();
                Ok((0..d)
                    .map(|k| {
                        let mut acc = c64::new(0.0, 0.0);
                        for i in 0..d {
                            acc += s.vectors[(i, k)].conj() * av[(i, k)];
                        }
                        acc
                    })
                    .collect())
            })
            .collect()
    }
}

pub fn ground_state(spec: &SpectralData) -> GroundState {
    spec.ground_state()
}

/// `Σ_n w_n ⟨n|A|n⟩`.
pub fn thermal_expectation(a: &BlockOperator, spec: &SpectralData) -> Result<c64> {
    let diag = spec.diagonal_elements(a)?;
    let mut acc = c64::new(0.0, 0.0);
    for (si, d) in diag.iter().enumerate() {
        for (w, v) in spec.weights(si).iter().zip(d) {
            if *w != 0.0 {
                acc += *v * *w;
            }
        }
    }
    Ok(acc)
}
