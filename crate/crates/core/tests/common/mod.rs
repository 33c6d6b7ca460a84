//! Brute-force operators on the full `2^L` Fock space, written directly
//! from the second-quantized definitions with Jordan–Wigner signs. They share
//! no code with the sector-blocked builders they are compared against.
#![allow(dead_code)]

use faer::{c64, Mat, Scale};
use xxzlab::model::{FermionParity, FockSector, ModelParams};
use xxzlab::spectra::hermitian_eigen;

pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn zero(dim: usize) -> Mat<c64> {
    Mat::zeros(dim, dim)
}

fn parity_below(word: u32, x: usize) -> f64 {
    if (word & ((1u32 << x) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a†_x a_y` on the full space.
pub fn hop(l: usize, x: usize, y: usize) -> Mat<c64> {
    let dim = 1usize << l;
    let mut m = zero(dim);
    for w in 0..dim as u32 {
        if w >> y & 1 == 0 {
            continue;
        }
        let s1 = parity_below(w, y);
        let w1 = w & !(1 << y);
        if w1 >> x & 1 == 1 {
            continue;
        }
        let s2 = parity_below(w1, x);
        let w2 = w1 | (1 << x);
        m[(w2 as usize, w as usize)] += c64::new(s1 * s2, 0.0);
    }
    m
}

/// `n_x − 1/2`.
pub fn centered(l: usize, x: usize) -> Mat<c64> {
    let dim = 1usize << l;
    let mut m = zero(dim);
    for w in 0..dim {
        m[(w, w)] = c64::new(((w >> x) & 1) as f64 - 0.5, 0.0);
    }
    m
}

pub fn number(l: usize, x: usize) -> Mat<c64> {
    let dim = 1usize << l;
    let mut m = zero(dim);
    for w in 0..dim {
        m[(w, w)] = c64::new(((w >> x) & 1) as f64, 0.0);
    }
    m
}

fn seam(params: &ModelParams, x: usize) -> f64 {
    // the seam sign of a fixed-parity ring; the particle-dependent variant is not modelled here
    if x + 1 == params.sites {
        match params.parity {
            FermionParity::Periodic => 1.0,
            FermionParity::Antiperiodic => -1.0,
            FermionParity::SpinChain => panic!("dense oracle covers fixed parities only"),
        }
    } else {
        1.0
    }
}

fn bonds(params: &ModelParams) -> usize {
    if params.is_periodic() {
        params.sites
    } else {
        params.sites - 1
    }
}

/// `e^{iφ} a†_x a_{x+1}` with the seam sign folded in.
fn forward(params: &ModelParams, x: usize) -> Mat<c64> {
    let l = params.sites;
    let phase = c64::from_polar(seam(params, x), params.flux);
    hop(l, x, (x + 1) % l) * Scale(phase)
}

pub fn hamiltonian(params: &ModelParams) -> Mat<c64> {
    let l = params.sites;
    let dim = 1usize << l;
    let mut h = zero(dim);
    let half_j = c64::new(params.hopping / 2.0, 0.0);
    for x in 0..bonds(params) {
        let f = forward(params, x);
        h -= (&f + f.adjoint()) * Scale(half_j);
        let y = (x + 1) % l;
        h -= centered(l, x) * centered(l, y) * Scale(c64::new(params.anisotropy, 0.0));
    }
    let c = params.field_coefficient();
    for x in 0..l {
        h += centered(l, x) * Scale(c64::new(c, 0.0));
    }
    for cp in &params.couplings {
        for x in 0..l {
            for y in [x + cp.range, x + l - cp.range] {
                if !params.is_periodic() && (y % l).abs_diff(x) != cp.range {
                    continue;
                }
                let y = y % l;
                h -= centered(l, x) * centered(l, y) * Scale(c64::new(params.epsilon * cp.value, 0.0));
            }
        }
    }
    h
}

/// `j_x = (iJ/2)(e^{−iφ} a†_{x+1} a_x − e^{iφ} a†_x a_{x+1})`.
pub fn current(params: &ModelParams, x: usize) -> Mat<c64> {
    let f = forward(params, x);
    (f.adjoint() - &f) * Scale(I * (params.hopping / 2.0))
}

/// `Δ_x = −(J/2)(e^{iφ} a†_x a_{x+1} + h.c.)`.
pub fn kinetic_site(params: &ModelParams, x: usize) -> Mat<c64> {
    let f = forward(params, x);
    (&f + f.adjoint()) * Scale(c64::new(-params.hopping / 2.0, 0.0))
}

pub fn fourier(l: usize, p: f64, local: impl Fn(usize) -> Mat<c64>) -> Mat<c64> {
    let mut acc = zero(1 << l);
    for x in 0..l {
        acc += local(x) * Scale(c64::from_polar(1.0, -p * x as f64));
    }
    acc
}

pub fn current_fourier(params: &ModelParams, p: f64) -> Mat<c64> {
    fourier(params.sites, p, |x| current(params, x))
}

pub fn density_fourier(params: &ModelParams, p: f64) -> Mat<c64> {
    fourier(params.sites, p, |x| number(params.sites, x))
}

pub fn trace(m: &Mat<c64>) -> c64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub fn max_abs(m: &Mat<c64>) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Eigen-decomposition of the full Hamiltonian, for functions of `H`.
pub struct DenseSystem {
    pub energies: Vec<f64>,
    pub vectors: Mat<c64>,
}

impl DenseSystem {
    pub fn new(params: &ModelParams) -> Self {
        let (energies, vectors) = hermitian_eigen(&hamiltonian(params)).expect("dense eigensolver");
        DenseSystem { energies, vectors }
    }

    /// `V diag(f(E)) V†`.
    pub fn function(&self, f: impl Fn(f64) -> c64) -> Mat<c64> {
        let d = self.energies.len();
        let mut diag = zero(d);
        for (i, &e) in self.energies.iter().enumerate() {
            diag[(i, i)] = f(e);
        }
        &self.vectors * &diag * self.vectors.adjoint()
    }

    pub fn gibbs(&self, beta: f64) -> Mat<c64> {
        let e0 = self.energies[0];
        let z: f64 = self.energies.iter().map(|e| (-beta * (e - e0)).exp()).sum();
        self.function(|e| c64::new((-beta * (e - e0)).exp() / z, 0.0))
    }

    /// `A(z) = e^{izH} A e^{−izH}`; energies are shifted for overflow safety.
    pub fn evolve(&self, a: &Mat<c64>, z: c64) -> Mat<c64> {
        let e0 = self.energies[0];
        let u = self.function(|e| (I * z * (e - e0)).exp());
        let v = self.function(|e| (-I * z * (e - e0)).exp());
        &u * a * &v
    }
}

/// Sector block of a full-space operator, in the ordering of `sector`.
pub fn restrict(full: &Mat<c64>, sector: &FockSector) -> Mat<c64> {
    let states = sector.states();
    Mat::from_fn(states.len(), states.len(), |i, j| full[(states[i] as usize, states[j] as usize)])
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
