use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Energy normalization of the closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// As printed: `v = (π/μ) sin μ` in units of `J`, so `v = 2` at `λ = 0`.
    Literal,
    /// Rescaled to the hopping `−(J/2)(a†_x a_{x+1} + h.c.)` of this crate,
    /// whose free band `−J cos k` has Fermi velocity `J`.
    Lattice,
}

/// Luttinger-liquid data of the XXZ chain from the Bethe ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheForms {
    pub mu: f64,
    pub v: f64,
    pub k_exp: f64,
    pub d_b: f64,
    pub kappa_b: f64,
    pub normalization: Normalization,
}

/// `cos μ = −λ/J`, `v = (π/μ) sin μ`, `K = π/(2(π−μ))`,
/// `D = π sin μ/(2μ(π−μ))`, `κ = μ/(2π(π−μ) sin μ)`.
pub fn bethe_closed_forms(lambda: f64, j: f64) -> Result<BetheForms> {
    let ratio = lambda / j;
    if !ratio.is_finite() || ratio.abs() >= 1.0 {
        return Err(Error::OutOfPhase(ratio.abs()));
    }
    let mu = (-ratio).acos();
    Ok(from_mu(mu, j))
}

impl BetheForms {
    /// Literal forms at a given `μ ∈ (0, π)`, energies in units of `J`.
    pub fn at_mu(mu: f64, j: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < PI) {
            return Err(Error::OutOfPhase((-mu.cos()).abs()));
        }
        Ok(from_mu(mu, j))
    }

    /// Closed forms in the normalization of this crate's Hamiltonian.
    pub fn lattice(lambda: f64, j: f64) -> Result<Self> {
        Ok(bethe_closed_forms(lambda, j)?.to_lattice())
    }

    pub fn to_lattice(self) -> Self {
        match self.normalization {
            Normalization::Lattice => self,
            Normalization::Literal => BetheForms {
                v: self.v / 2.0,
                d_b: self.d_b / 2.0,
                kappa_b: self.kappa_b * 2.0,
                normalization: Normalization::Lattice,
                ..self
            },
        }
    }
}

fn from_mu(mu: f64, j: f64) -> BetheForms {
    let s = mu.sin();
    BetheForms {
        mu,
        v: j * PI / mu * s,
        k_exp: PI / (2.0 * (PI - mu)),
        d_b: j * PI * s / (2.0 * mu * (PI - mu)),
        kappa_b: mu / (2.0 * PI * (PI - mu) * s) / j,
        normalization: Normalization::Literal,
    }
}

/// `(D/κ − v², D − vK/π)`.
pub fn haldane_residuals(forms: &BetheForms) -> (f64, f64) {
    (
        forms.d_b / forms.kappa_b - forms.v * forms.v,
        forms.d_b - forms.v * forms.k_exp / PI,
    )
}
