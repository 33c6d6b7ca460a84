use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One term `v(r)` of the longer-range density interaction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub range: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Fermionic boundary condition on the seam bond of a ring.
///
/// `SpinChain` reproduces the Jordan–Wigner image of a periodic spin chain:
/// antiperiodic fermions when the particle number is even, periodic when odd.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FermionParity {
    #[default]
    Periodic,
    Antiperiodic,
    SpinChain,
}

impl FermionParity {
    /// Sign multiplying both hopping directions across the seam in sector `n`.
    pub fn seam_sign(self, n: usize) -> f64 {
        match self {
            FermionParity::Periodic => 1.0,
            FermionParity::Antiperiodic => -1.0,
            FermionParity::SpinChain => {
                if n % 2 == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Sign with which the probe field enters: `Plus` adds `+h Σ(n_x − 1/2)`,
/// `Minus` adds `−h Σ(n_x − 1/2)` like the static field term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeSign {
    #[default]
    Plus,
    Minus,
}

impl ProbeSign {
    pub fn factor(self) -> f64 {
        match self {
            ProbeSign::Plus => 1.0,
            ProbeSign::Minus => -1.0,
        }
    }
}

/// Physical specification of a chain.
///
/// The Hamiltonian is
/// `H = −(J/2) Σ (e^{iφ} a†_x a_{x+1} + h.c.) − λ Σ (n_x−½)(n_{x+1}−½) − h Σ (n_x−½)
///      − ε Σ_x Σ_r v(r) (n_x−½)[(n_{x+r}−½) + (n_{x−r}−½)] ± h_probe Σ (n_x−½)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default = "default_hopping")]
    pub hopping: f64,
    #[serde(default)]
    pub anisotropy: f64,
    #[serde(default)]
    pub field: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    pub sites: usize,
    #[serde(default)]
    pub flux: f64,
    #[serde(default)]
    pub probe_field: f64,
    #[serde(default)]
    pub probe_sign: ProbeSign,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub parity: FermionParity,
}

fn default_hopping() -> f64 {
    1.0
}

impl ModelParams {
    /// Plain XXZ ring with `J = 1`.
    pub fn xxz(sites: usize, anisotropy: f64) -> Self {
        ModelParams {
            hopping: 1.0,
            anisotropy,
            field: 0.0,
            epsilon: 0.0,
            couplings: Vec::new(),
            sites,
            flux: 0.0,
            probe_field: 0.0,
            probe_sign: ProbeSign::Plus,
            boundary: Boundary::Periodic,
            parity: FermionParity::Periodic,
        }
    }

    pub fn free(sites: usize) -> Self {
        Self::xxz(sites, 0.0)
    }

    pub fn with_hopping(mut self, j: f64) -> Self {
        self.hopping = j;
        self
    }

    pub fn with_field(mut self, h: f64) -> Self {
        self.field = h;
        self
    }

    pub fn with_perturbation(mut self, epsilon: f64, couplings: &[(usize, f64)]) -> Self {
        self.epsilon = epsilon;
        self.couplings = couplings
            .iter()
            .map(|&(range, value)| Coupling { range, value })
            .collect();
        self
    }

    pub fn with_flux(mut self, phi: f64) -> Self {
        self.flux = phi;
        self
    }

    pub fn with_probe(mut self, h: f64, sign: ProbeSign) -> Self {
        self.probe_field = h;
        self.probe_sign = sign;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_parity(mut self, parity: FermionParity) -> Self {
        self.parity = parity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.sites < 4 || self.sites % 2 != 0 {
            return bad(format!("L = {} must be even and at least 4", self.sites));
        }
        if self.sites > 30 {
            return bad(format!("L = {} exceeds the 30-site word size", self.sites));
        }
        let reals = [
            ("hopping", self.hopping),
            ("anisotropy", self.anisotropy),
            ("field", self.field),
            ("epsilon", self.epsilon),
            ("flux", self.flux),
            ("probe_field", self.probe_field),
        ];
        for (name, v) in reals {
            if !v.is_finite() {
                return bad(format!("{name} = {v} is not finite"));
            }
        }
        if !(-PI..PI).contains(&self.flux) {
            return bad(format!("flux {} outside [−π, π)", self.flux));
        }
        for c in &self.couplings {
            if !c.value.is_finite() {
                return bad(format!("v({}) = {} is not finite", c.range, c.value));
            }
            if c.range < 2 {
                return bad(format!("coupling range {} must be at least 2", c.range));
            }
            if 2 * c.range >= self.sites {
                return bad(format!(
                    "coupling range {} must be below L/2 = {}",
                    c.range,
                    self.sites / 2
                ));
            }
        }
        Ok(())
    }

    /// Coefficient `c` of the uniform term `c Σ (n_x − 1/2)`.
    pub fn field_coefficient(&self) -> f64 {
        -self.field + self.probe_sign.factor() * self.probe_field
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    /// Sign on the seam bond in sector `n` (always `+1` on an open chain).
    pub fn seam_sign(&self, n: usize) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.parity.seam_sign(n),
            Boundary::Open => 1.0,
        }
    }

    pub fn half_filling(&self) -> usize {
        self.sites / 2
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("params serialize");
        hex_digest(json.as_bytes())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: ModelParams = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Index `m` of `p = 2πm/L`, reduced to `0..L`.
pub fn momentum_index(p: f64, sites: usize) -> Result<usize> {
    let m = p * sites as f64 / (2.0 * PI);
    let r = m.round();
    if !m.is_finite() || (m - r).abs() > 1e-9 * r.abs().max(1.0) {
        return Err(Error::MomentumGrid { p, sites });
    }
    Ok((r as i64).rem_euclid(sites as i64) as usize)
}

pub fn momentum(index: usize, sites: usize) -> f64 {
    2.0 * PI * index as f64 / sites as f64
}
