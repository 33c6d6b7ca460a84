//! Exact diagonalization of finite perturbed XXZ fermion chains.
//!
//! The crate builds the fermionized Hamiltonian and its currents on a ring,
//! diagonalizes every particle-number sector, and evaluates Drude weights and
//! susceptibilities in all of their standard formulations: real-time
//! (canonical), imaginary-time (Euclidean), ground-state twist curvature and
//! the thermal Kubo-product form. A free-fermion oracle provides closed-form
//! ground truth at zero interaction, and [`verify`] turns the exact identities
//! relating the formulations into numerical checks.
//!
//! ```
//! use xxzlab::model::ModelParams;
//! use xxzlab::spectra::{diagonalize, SectorSelection, Temperature};
//! use xxzlab::transport::euclidean_h;
//!
//! let params = ModelParams::xxz(6, 0.3);
//! let spec = diagonalize(&params, &SectorSelection::All, Temperature::Finite(4.0))?;
//! let p = 2.0 * std::f64::consts::PI / 6.0;
//! // Static current response cancels the diamagnetic term at p ≠ 0.
//! let h = euclidean_h(&spec, 0.0, p)?;
//! assert!(h.value.abs() < 1e-10);
//! # Ok::<(), xxzlab::Error>(())
//! ```

pub mod correlators;
mod error;
pub mod model;
pub mod oracle;
pub mod spectra;
pub mod transport;
pub mod verify;

#[cfg(doctest)]
mod guide;

pub use error::{Error, Result};

/// Forces single-threaded dense linear algebra so that repeated runs are
/// bitwise identical regardless of the thread pool size.
pub fn set_deterministic(on: bool) {
    if on {
        faer::set_global_parallelism(faer::Par::Seq);
    } else {
        faer::set_global_parallelism(faer::Par::rayon(0));
    }
}
