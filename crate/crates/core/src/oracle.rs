//! Closed-form free-fermion ground truth at `λ = ε = 0`.
//!
//! On a ring the modes `c_k = L^{−1/2} Σ_x e^{−ikx} a_x` diagonalize the
//! hopping, with one-particle energies `ε(k) = −J cos(k + φ) + c` where `c` is
//! the net field coefficient. The uniform bond phase `e^{iφ}` is the same as
//! the momentum shift `k → k + φ`. Antiperiodic fermions live on the grid
//! `k = 2π(j + ½)/L`.
//!
//! Fourier densities are fermion bilinears
//! `ô_{μ,p} = Σ_k γ_μ(k, p) c†_k c_{k+p}` with `γ_ρ = 1` and
//! `γ_j = (iJ/2)(e^{−i(k+φ)} − e^{i(k+p+φ)})`, so every two-point function
//! reduces by Wick's theorem to a single sum over particle–hole pairs
//! `(k, k + p)` with transition frequency `Ω = ε(k) − ε(k + p)`.

use std::f64::consts::PI;

use faer::c64;

use crate::correlators::{damped_integral, matsubara_index, Kind};
use crate::error::{Error, Result};
use crate::model::{momentum_index, Boundary, FermionParity, ModelParams};
use crate::spectra::Temperature;
use crate::transport::KKernel;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// Occupations within this distance of the chemical potential count as half filled at `β = ∞`.
const ZERO_MODE_TOL: f64 = 1e-10;

/// Time argument of a free two-point function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeArg {
    /// `(1/L)⟨ô_p(z) ô'_{−p}⟩` at complex time, disconnected part included.
    Complex(c64),
    /// Connected `(1/L)∫_0^β e^{−ip0τ}⟨T ô_p(−iτ); ô'_{−p}⟩ dτ`.
    Matsubara(f64),
    /// `(1/L)⟨[ô_p(t), ô'_{−p}]⟩`.
    Commutator(f64),
}

/// Free chain described by the same parameters as the many-body engine.
#[derive(Clone, Debug)]
pub struct FreeFermion {
    params: ModelParams,
}

impl FreeFermion {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if params.anisotropy != 0.0 || (params.epsilon != 0.0 && params.couplings.iter().any(|c| c.value != 0.0)) {
            return Err(Error::NotApplicable(
                "the free-fermion oracle needs λ = ε = 0".into(),
            ));
        }
        if params.boundary == Boundary::Open {
            return Err(Error::NotApplicable("the free-fermion oracle needs a ring".into()));
        }
        Ok(FreeFermion {
            params: params.clone(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn sites(&self) -> usize {
        self.params.sites
    }

    fn antiperiodic(&self, n: usize) -> bool {
        self.params.parity.seam_sign(n) < 0.0
    }

    /// Momentum grid of sector `n`.
    pub fn momenta(&self, n: usize) -> Vec<f64> {
        let l = self.sites();
        let shift = if self.antiperiodic(n) { 0.5 } else { 0.0 };
        (0..l).map(|j| 2.0 * PI * (j as f64 + shift) / l as f64).collect()
    }

    /// `ε(k) = −J cos(k + φ) + c`.
    pub fn dispersion(&self, k: f64) -> f64 {
        -self.params.hopping * (k + self.params.flux).cos() + self.params.field_coefficient()
    }

    fn sorted_energies(&self, n: usize) -> Vec<f64> {
        let mut e: Vec<f64> = self.momenta(n).into_iter().map(|k| self.dispersion(k)).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Lowest energy with `n` particles, including the constant `−cL/2`.
    pub fn ground_energy(&self, n: usize) -> Result<f64> {
        if n > self.sites() {
            return Err(Error::InvalidArgument(format!("{n} particles on {} sites", self.sites())));
        }
        let e = self.sorted_energies(n);
        let constant = -self.params.field_coefficient() * self.sites() as f64 / 2.0;
        Ok(e[..n].iter().sum::<f64>() + constant)
    }

    /// Occupied momenta of the `n`-particle ground state; fails when the Fermi
    /// shell is only partly filled (a level crossing in `φ`).
    pub fn ground_occupation(&self, n: usize) -> Result<Vec<f64>> {
        let mut ks = self.momenta(n);
        ks.sort_by(|a, b| self.dispersion(*a).total_cmp(&self.dispersion(*b)));
        if n > 0 && n < ks.len() {
            let gap = self.dispersion(ks[n]) - self.dispersion(ks[n - 1]);
            if gap <= ZERO_MODE_TOL {
                let shell = ks.iter().filter(|&&k| (self.dispersion(k) - self.dispersion(ks[n - 1])).abs() <= ZERO_MODE_TOL).count();
                return Err(Error::DegenerateGround(shell));
            }
        }
        ks.truncate(n);
        Ok(ks)
    }

    fn thermal_grid(&self) -> Result<Vec<f64>> {
        match self.params.parity {
            FermionParity::SpinChain => Err(Error::NotApplicable(
                "sector-dependent boundary conditions are not a free Gibbs state".into(),
            )),
            _ => Ok(self.momenta(0)),
        }
    }

    /// Grand-canonical occupations on the thermal grid; `½` for zero modes at `β = ∞`.
    pub fn occupations(&self, temperature: Temperature) -> Result<Vec<f64>> {
        let ks = self.thermal_grid()?;
        Ok(ks
            .iter()
            .map(|&k| {
                let e = self.dispersion(k);
                match temperature {
                    Temperature::Finite(beta) => fermi(beta * e),
                    Temperature::Zero => {
                        if e.abs() <= ZERO_MODE_TOL {
                            0.5
                        } else if e < 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            })
            .collect())
    }

    fn gamma(&self, mu: usize, k: f64, p: f64) -> c64 {
        if mu == 0 {
            return c64::new(1.0, 0.0);
        }
        let phi = self.params.flux;
        let i_half_j = c64::new(0.0, self.params.hopping / 2.0);
        i_half_j * (c64::from_polar(1.0, -(k + phi)) - c64::from_polar(1.0, k + p + phi))
    }

    /// `(γ_μ(k,p) γ_ν(k+p,−p), f_k, f_{k+p}, Ω)` for every `k`.
    fn pairs(&self, kind: Kind, p: f64, temperature: Temperature) -> Result<Vec<(c64, f64, f64, f64)>> {
        let l = self.sites();
        let m = momentum_index(p, l)?;
        let p = 2.0 * PI * m as f64 / l as f64;
        let ks = self.thermal_grid()?;
        let f = self.occupations(temperature)?;
        let (mu, nu) = components(kind);
        Ok((0..l)
            .map(|j| {
                let jp = (j + m) % l;
                let (k, kp) = (ks[j], ks[jp]);
                let amp = self.gamma(mu, k, p) * self.gamma(nu, k + p, -p);
                (amp, f[j], f[jp], self.dispersion(k) - self.dispersion(kp))
            })
            .collect())
    }

    fn expectation(&self, mu: usize, temperature: Temperature) -> Result<c64> {
        let f = self.occupations(temperature)?;
        Ok(self
            .thermal_grid()?
            .iter()
            .zip(&f)
            .map(|(&k, &fk)| self.gamma(mu, k, 0.0) * fk)
            .sum())
    }

    /// Two-point function of `(ô_{μ,p}, ô_{ν,−p})` per [`TimeArg`].
    pub fn correlator(&self, kind: Kind, p: f64, arg: TimeArg, temperature: Temperature) -> Result<c64> {
        let l = self.sites() as f64;
        let pairs = self.pairs(kind, p, temperature)?;
        let value = match arg {
            TimeArg::Complex(z) => {
                let mut acc = ZERO;
                for &(amp, fk, fkp, om) in &pairs {
                    let w = fk * (1.0 - fkp);
                    if w == 0.0 {
                        continue;
                    }
                    let re = w.ln() - z.im * om;
                    if re > 700.0 {
                        return Err(Error::Overflow(re));
                    }
                    acc += amp * c64::from_polar(re.exp(), z.re * om);
                }
                if momentum_index(p, self.sites())? == 0 {
                    let (mu, nu) = components(kind);
                    acc += self.expectation(mu, temperature)? * self.expectation(nu, temperature)?;
                }
                acc
            }
            TimeArg::Commutator(t) => pairs
                .iter()
                .map(|&(amp, fk, fkp, om)| amp * (fk - fkp) * c64::from_polar(1.0, om * t))
                .sum(),
            TimeArg::Matsubara(p0) => {
                matsubara_index(p0, temperature)?;
                let mut regular = ZERO;
                let mut degenerate = ZERO;
                for &(amp, fk, fkp, om) in &pairs {
                    if om.abs() <= 1e-9 * self.params.hopping.abs().max(1.0) {
                        if p0 == 0.0 {
                            degenerate += amp * fk * (1.0 - fkp);
                        }
                    } else {
                        regular += amp * (fkp - fk) / c64::new(om, -p0);
                    }
                }
                match temperature {
                    Temperature::Finite(beta) => regular + degenerate * beta,
                    Temperature::Zero => {
                        if degenerate.norm() > 1e-12 {
                            return Err(Error::Divergent(format!(
                                "free zero modes carry weight {:.3e}",
                                degenerate.norm()
                            )));
                        }
                        regular
                    }
                }
            }
        };
        Ok(value / l)
    }

    /// `⟨Δ⟩/L = (1/L) Σ_k −J cos(k + φ) f_k`.
    pub fn kinetic_density(&self, temperature: Temperature) -> Result<f64> {
        let f = self.occupations(temperature)?;
        let j = self.params.hopping;
        let phi = self.params.flux;
        let sum: f64 = self
            .thermal_grid()?
            .iter()
            .zip(&f)
            .map(|(&k, &fk)| -j * (k + phi).cos() * fk)
            .sum();
        Ok(sum / self.sites() as f64)
    }

    fn commutator_integral(&self, kind: Kind, p: f64, temperature: Temperature, kernel: impl Fn(f64) -> c64) -> Result<c64> {
        let pairs = self.pairs(kind, p, temperature)?;
        let s: c64 = pairs
            .iter()
            .map(|&(amp, fk, fkp, om)| amp * (fk - fkp) * kernel(om))
            .sum();
        Ok(s / self.sites() as f64)
    }

    pub fn canonical_h(&self, temperature: Temperature, eta: f64, p: f64, t_max: f64) -> Result<c64> {
        let integral = self.commutator_integral(Kind::JJ, p, temperature, |om| damped_integral(eta, om, t_max))?;
        Ok(c64::new(0.0, 1.0) * integral - self.kinetic_density(temperature)?)
    }

    pub fn canonical_k(&self, temperature: Temperature, eta: f64, p: f64, t_max: f64, kernel: KKernel) -> Result<c64> {
        let integral = self.commutator_integral(Kind::RhoRho, p, temperature, |om| match kernel {
            KKernel::Oscillatory => damped_integral(0.0, om - eta, t_max),
            KKernel::Damped => damped_integral(eta, om, t_max),
        })?;
        Ok(c64::new(0.0, -1.0) * integral)
    }

    pub fn euclidean_h(&self, temperature: Temperature, p0: f64, p: f64) -> Result<c64> {
        let jj = self.correlator(Kind::JJ, p, TimeArg::Matsubara(p0), temperature)?;
        Ok(-jj - self.kinetic_density(temperature)?)
    }

    pub fn euclidean_k(&self, temperature: Temperature, p0: f64, p: f64) -> Result<c64> {
        self.correlator(Kind::RhoRho, p, TimeArg::Matsubara(p0), temperature)
    }

    /// `(β/L)⟨𝒥²⟩`; the free total current is conserved so the commutator part vanishes.
    pub fn thermal_drude(&self, temperature: Temperature) -> Result<c64> {
        let connected = self.correlator(Kind::JJ, 0.0, TimeArg::Matsubara(0.0), temperature)?;
        let mean = self.expectation(1, temperature)?;
        let disconnected = mean * mean / self.sites() as f64;
        match temperature {
            Temperature::Finite(beta) => Ok(connected + disconnected * beta),
            Temperature::Zero if disconnected.norm() > 1e-12 => Err(Error::Divergent(
                "ground state carries a persistent current".into(),
            )),
            Temperature::Zero => Ok(connected),
        }
    }

    /// `(1/L) ∂²E₀/∂φ² = (J/L) Σ_occ cos(k + φ)` in sector `n`.
    pub fn twist_drude(&self, n: usize) -> Result<f64> {
        let occ = self.ground_occupation(n)?;
        let j = self.params.hopping;
        let phi = self.params.flux;
        Ok(occ.iter().map(|&k| j * (k + phi).cos()).sum::<f64>() / self.sites() as f64)
    }

    /// `−Δn² / (L·[E(N+Δn) + E(N−Δn) − 2E(N)])`.
    pub fn field_susceptibility(&self, n: usize, delta_n: usize) -> Result<f64> {
        if delta_n == 0 || delta_n > n || n + delta_n > self.sites() {
            return Err(Error::InvalidArgument(format!("Δn = {delta_n} around N = {n}")));
        }
        let second = self.ground_energy(n + delta_n)? + self.ground_energy(n - delta_n)?
            - 2.0 * self.ground_energy(n)?;
        let dn = delta_n as f64;
        Ok(-dn * dn / (self.sites() as f64 * second))
    }
}

fn components(kind: Kind) -> (usize, usize) {
    match kind {
        Kind::RhoRho => (0, 0),
        Kind::RhoJ => (0, 1),
        Kind::JRho => (1, 0),
        Kind::JJ => (1, 1),
    }
}

/// `1/(e^x + 1)` without overflow.
fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

pub fn ff_correlator(params: &ModelParams, kind: Kind, p: f64, arg: TimeArg, temperature: Temperature) -> Result<c64> {
    FreeFermion::new(params)?.correlator(kind, p, arg, temperature)
}

/// Free twist Drude weight of `particles` fermions on `sites` sites at zero flux.
pub fn ff_twist_drude(sites: usize, particles: usize, hopping: f64, parity: FermionParity) -> Result<f64> {
    let params = ModelParams::free(sites).with_hopping(hopping).with_parity(parity);
    FreeFermion::new(&params)?.twist_drude(particles)
}
