//! Engine-versus-oracle regression at the free point.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use xxzlab::model::{momentum, FermionParity, ModelParams};
use xxzlab::oracle::FreeFermion;
use xxzlab::spectra::{diagonalize, SectorSelection, SpectralData, Temperature};
use xxzlab::transport::{
    canonical_h, canonical_k, euclidean_h, euclidean_k, field_susceptibility, thermal_drude_regularized,
    twist_drude, FieldMethod, FieldOptions, KKernel, TransportResult, TwistMethod, TwistOptions,
};
use xxzlab::{Error, Result};

/// Tolerance of every exact comparison.
pub const ORACLE_TOL: f64 = 1e-9;
/// The finite-difference twist carries stencil and rounding error.
pub const STENCIL_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub formulation: String,
    pub engine: Option<f64>,
    pub oracle: Option<f64>,
    /// Modulus of the complex difference; `0` when both sides diverge.
    pub diff: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl Comparison {
    pub fn passes(&self) -> bool {
        self.diff <= self.tolerance
    }
}

fn compare(
    formulation: impl Into<String>,
    engine: Result<TransportResult>,
    oracle: Result<faer::c64>,
    tolerance: f64,
) -> Result<Comparison> {
    let formulation = formulation.into();
    match (engine, oracle) {
        (Ok(e), Ok(o)) => Ok(Comparison {
            formulation,
            engine: Some(e.value),
            oracle: Some(o.re),
            diff: faer::c64::new(e.value - o.re, e.imag - o.im).norm(),
            tolerance,
            note: None,
        }),
        (Err(Error::Divergent(a)), Err(Error::Divergent(_))) => Ok(Comparison {
            formulation,
            engine: None,
            oracle: None,
            diff: 0.0,
            tolerance,
            note: Some(format!("both divergent: {a}")),
        }),
        (Err(Error::Divergent(a)), Ok(o)) => Ok(Comparison {
            formulation,
            engine: None,
            oracle: Some(o.re),
            diff: f64::INFINITY,
            tolerance,
            note: Some(format!("engine divergent: {a}")),
        }),
        (Ok(e), Err(Error::Divergent(b))) => Ok(Comparison {
            formulation,
            engine: Some(e.value),
            oracle: None,
            diff: f64::INFINITY,
            tolerance,
            note: Some(format!("oracle divergent: {b}")),
        }),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Thermal formulations at one `(η, T, p, p0)` on a prepared spectrum.
pub fn thermal_comparisons(spec: &SpectralData, eta: f64, time: f64, p: f64, p0: f64) -> Result<Vec<Comparison>> {
    let ff = FreeFermion::new(spec.params())?;
    let t = spec.temperature();
    Ok(vec![
        compare("canonical_h", canonical_h(spec, eta, p, time), ff.canonical_h(t, eta, p, time), ORACLE_TOL)?,
        compare(
            "canonical_k",
            canonical_k(spec, eta, p, time, KKernel::Oscillatory),
            ff.canonical_k(t, eta, p, time, KKernel::Oscillatory),
            ORACLE_TOL,
        )?,
        compare(
            "canonical_k/damped",
            canonical_k(spec, eta, p, time, KKernel::Damped),
            ff.canonical_k(t, eta, p, time, KKernel::Damped),
            ORACLE_TOL,
        )?,
        compare("euclidean_h", euclidean_h(spec, p0, p), ff.euclidean_h(t, p0, p), ORACLE_TOL)?,
        compare("euclidean_k", euclidean_k(spec, p0, p), ff.euclidean_k(t, p0, p), ORACLE_TOL)?,
        compare("thermal_d", thermal_drude_regularized(spec, eta), ff.thermal_drude(t), ORACLE_TOL)?,
    ])
}

/// Ground-state curvatures in sector `particles` (field curvature at half filling only).
pub fn ground_comparisons(params: &ModelParams, particles: usize) -> Result<Vec<Comparison>> {
    let ff = FreeFermion::new(params)?;
    let opts = TwistOptions {
        particles: Some(particles),
        ..Default::default()
    };
    let oracle_d = || ff.twist_drude(particles).map(|d| faer::c64::new(d, 0.0));
    let mut out = vec![
        compare(
            "twist_d/perturbation2",
            twist_drude(params, TwistMethod::Perturbation2, opts),
            oracle_d(),
            ORACLE_TOL,
        )?,
        compare(
            "twist_d/finite_difference",
            twist_drude(params, TwistMethod::FiniteDifference, opts),
            oracle_d(),
            STENCIL_TOL,
        )?,
    ];
    if particles >= 2 && particles + 2 <= params.sites {
        let fopts = FieldOptions {
            particles: Some(particles),
            ..Default::default()
        };
        out.push(compare(
            "field_kappa/sector_legendre",
            field_susceptibility(params, FieldMethod::SectorLegendre { delta_n: 2 }, fopts),
            ff.field_susceptibility(particles, 2).map(|k| faer::c64::new(k, 0.0)),
            ORACLE_TOL,
        )?);
    }
    Ok(out)
}

/// One thermal point of the regression matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalCase {
    pub params: ModelParams,
    pub temperature: Temperature,
    pub etas_times: Vec<(f64, f64)>,
    pub p_indices: Vec<usize>,
    pub p0s: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundCase {
    pub params: ModelParams,
    pub particles: usize,
}

/// Free chains with `L ≤ 12`; zero-temperature points avoid half-filled
/// zero modes, whose ensembles are handled by the finite-`β` points.
pub fn regression_matrix() -> (Vec<ThermalCase>, Vec<GroundCase>) {
    let et = vec![(0.1, 200.0), (0.5, 40.0)];
    let finite = |l: usize, beta: f64, params: ModelParams| ThermalCase {
        params,
        temperature: Temperature::Finite(beta),
        etas_times: et.clone(),
        p_indices: vec![0, 1, l / 2],
        p0s: vec![0.0, 2.0 * PI / beta],
    };
    let zero = |l: usize, params: ModelParams| ThermalCase {
        params,
        temperature: Temperature::Zero,
        etas_times: et.clone(),
        p_indices: vec![0, 1, l / 2],
        p0s: vec![0.0, 0.7],
    };
    let thermal = vec![
        finite(6, 1.5, ModelParams::free(6)),
        finite(6, 8.0, ModelParams::free(6)),
        finite(8, 8.0, ModelParams::free(8)),
        finite(8, 4.0, ModelParams::free(8).with_parity(FermionParity::Antiperiodic)),
        finite(10, 8.0, ModelParams::free(10)),
        finite(10, 3.0, ModelParams::free(10).with_flux(0.3).with_field(0.2)),
        finite(12, 2.0, ModelParams::free(12)),
        zero(6, ModelParams::free(6)),
        zero(8, ModelParams::free(8).with_parity(FermionParity::Antiperiodic)),
        zero(10, ModelParams::free(10)),
    ];
    let mut ground = Vec::new();
    for l in [6usize, 8, 10, 12] {
        let params = ModelParams::free(l).with_parity(FermionParity::SpinChain);
        ground.push(GroundCase {
            params: params.clone(),
            particles: l / 2,
        });
        ground.push(GroundCase {
            params,
            particles: l / 4,
        });
    }
    (thermal, ground)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseResult {
    pub label: String,
    pub comparisons: Vec<Comparison>,
}

fn thermal_label(c: &ThermalCase, eta: f64, time: f64, m: usize, p0: f64) -> String {
    let beta = match c.temperature {
        Temperature::Finite(b) => format!("{b}"),
        Temperature::Zero => "inf".into(),
    };
    format!(
        "L={} parity={:?} flux={} field={} beta={beta} eta={eta} T={time} p_index={m} p0={p0:.4}",
        c.params.sites, c.params.parity, c.params.flux, c.params.field
    )
}

/// Runs the whole matrix; every case reports its comparisons.
pub fn run_regression() -> Result<Vec<CaseResult>> {
    let (thermal, ground) = regression_matrix();
    let mut out = Vec::new();
    for case in &thermal {
        let spec = diagonalize(&case.params, &SectorSelection::All, case.temperature)?;
        let l = case.params.sites;
        for &(eta, time) in &case.etas_times {
            for &m in &case.p_indices {
                for &p0 in &case.p0s {
                    out.push(CaseResult {
                        label: thermal_label(case, eta, time, m, p0),
                        comparisons: thermal_comparisons(&spec, eta, time, momentum(m, l), p0)?,
                    });
                }
            }
        }
    }
    for case in &ground {
        out.push(CaseResult {
            label: format!(
                "L={} parity={:?} N={} ground",
                case.params.sites, case.params.parity, case.particles
            ),
            comparisons: ground_comparisons(&case.params, case.particles)?,
        });
    }
    Ok(out)
}
