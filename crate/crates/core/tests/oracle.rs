use std::f64::consts::PI;

use faer::c64;
use proptest::prelude::*;
use xxzlab::correlators::{complex_time_correlator, matsubara_correlator, realtime_commutator, ComplexTimeDomain, Kind};
use xxzlab::model::*;
use xxzlab::oracle::*;
use xxzlab::spectra::{diagonalize, SectorSelection, Temperature};
use xxzlab::transport::*;

fn close(a: c64, b: c64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

fn value(r: &TransportResult) -> c64 {
    c64::new(r.value, r.imag)
}

#[test]
fn refuses_interacting_and_open_chains() {
    assert!(matches!(FreeFermion::new(&ModelParams::xxz(6, 0.1)), Err(xxzlab::Error::NotApplicable(_))));
    assert!(FreeFermion::new(&ModelParams::free(6).with_perturbation(0.2, &[(2, 1.0)])).is_err());
    // ε with all-zero couplings is still free
    assert!(FreeFermion::new(&ModelParams::free(6).with_perturbation(0.2, &[(2, 0.0)])).is_ok());
    assert!(FreeFermion::new(&ModelParams::free(6).with_boundary(Boundary::Open)).is_err());
    let chain = FreeFermion::new(&ModelParams::free(6).with_parity(FermionParity::SpinChain)).unwrap();
    assert!(chain.occupations(Temperature::Finite(1.0)).is_err());
}

#[test]
fn ground_energies_are_sums_of_lowest_levels() {
    for params in [
        ModelParams::free(8),
        ModelParams::free(6).with_flux(0.3).with_field(0.2),
        ModelParams::free(8).with_parity(FermionParity::Antiperiodic).with_hopping(1.7),
        ModelParams::free(8).with_parity(FermionParity::SpinChain),
    ] {
        let ff = FreeFermion::new(&params).unwrap();
        for n in 0..=params.sites {
            let mut eps: Vec<f64> = ff.momenta(n).iter().map(|&k| ff.dispersion(k)).collect();
            eps.sort_by(f64::total_cmp);
            let direct: f64 = eps[..n].iter().sum::<f64>() - params.field_coefficient() * params.sites as f64 / 2.0;
            assert!((ff.ground_energy(n).unwrap() - direct).abs() < 1e-13);
            let ed = sector_ground_energy(&params, n).unwrap();
            assert!((ff.ground_energy(n).unwrap() - ed).abs() < 1e-11, "{params:?} N = {n}");
        }
    }
}

#[test]
fn static_current_correlator_is_minus_kinetic_bond() {
    let ff = FreeFermion::new(&ModelParams::free(10)).unwrap();
    let t = Temperature::Finite(3.0);
    let k = ff.kinetic_density(t).unwrap();
    for m in 1..10 {
        let jj = ff.correlator(Kind::JJ, momentum(m, 10), TimeArg::Matsubara(0.0), t).unwrap();
        assert!((jj + k).norm() < 1e-12);
    }
}

#[test]
fn conserved_number_has_no_zero_temperature_fluctuation() {
    let ff = FreeFermion::new(&ModelParams::free(6)).unwrap();
    let rr = ff.correlator(Kind::RhoRho, 0.0, TimeArg::Matsubara(0.0), Temperature::Zero).unwrap();
    assert!(rr.norm() < 1e-14);
}

#[test]
fn matsubara_current_correlator_matches_engine() {
    let params = ModelParams::free(10);
    let beta = 8.0;
    let spec = diagonalize(&params, &SectorSelection::All, Temperature::Finite(beta)).unwrap();
    let (p0, p) = (2.0 * PI / beta, momentum(1, 10));
    let ed = matsubara_correlator(&spec, Kind::JJ, p, p0).unwrap();
    let ff = ff_correlator(&params, Kind::JJ, p, TimeArg::Matsubara(p0), Temperature::Finite(beta)).unwrap();
    assert!(close(ed, ff, 1e-10), "{ed} vs {ff}");
}

#[test]
fn twist_drude_matches_engine_at_quarter_filling() {
    let params = ModelParams::free(12);
    let ff = ff_twist_drude(12, 3, 1.0, FermionParity::Periodic).unwrap();
    // k ∈ {0, ±π/6}: (1 + 2 cos π/6)/12
    assert!((ff - (1.0 + 3f64.sqrt()) / 12.0).abs() < 1e-14);
    let options = TwistOptions {
        particles: Some(3),
        ..Default::default()
    };
    let pt = twist_drude(&params, TwistMethod::Perturbation2, options).unwrap();
    assert!((pt.value - ff).abs() < 1e-9, "{} vs {ff}", pt.value);
    let fd = twist_drude(&params, TwistMethod::FiniteDifference, options).unwrap();
    assert!((fd.value - ff).abs() < 1e-7, "{} vs {ff}", fd.value);
}

#[test]
fn twist_drude_is_even_in_flux() {
    let ff = FreeFermion::new(&ModelParams::free(10)).unwrap();
    for phi in [0.05, 0.2] {
        let plus = FreeFermion::new(&ModelParams::free(10).with_flux(phi)).unwrap();
        let minus = FreeFermion::new(&ModelParams::free(10).with_flux(-phi)).unwrap();
        assert!((plus.ground_energy(5).unwrap() - minus.ground_energy(5).unwrap()).abs() < 1e-13);
    }
    // a half-filled shell is a level crossing
    assert!(matches!(ff.ground_occupation(4), Err(xxzlab::Error::DegenerateGround(2))));
}

#[test]
fn lattice_drude_weight_extrapolates_to_one_over_pi() {
    let sizes = [8, 10, 12, 14];
    let d: Vec<f64> = sizes
        .iter()
        .map(|&l| ff_twist_drude(l, l / 2, 1.0, FermionParity::SpinChain).unwrap())
        .collect();
    let fit = fit_inverse_l(&sizes, &d).unwrap();
    let lattice = BetheForms::lattice(0.0, 1.0).unwrap().d_b;
    assert!((fit.a - lattice).abs() <= 0.01 * lattice, "{} vs {lattice}", fit.a);
}

#[test]
fn field_susceptibility_matches_engine() {
    // closed Fermi shells; on a half-filled shell E(N±1) − E(N) vanishes and κ diverges
    for params in [ModelParams::free(10), ModelParams::free(8).with_parity(FermionParity::SpinChain)] {
        let n = params.sites / 2;
        let ff = FreeFermion::new(&params).unwrap().field_susceptibility(n, 1).unwrap();
        let ed = field_susceptibility(&params, FieldMethod::SectorLegendre { delta_n: 1 }, FieldOptions::default()).unwrap();
        assert!((ed.value - ff).abs() < 1e-10, "{} vs {ff}", ed.value);
    }
}

#[derive(Debug, Clone)]
struct Point {
    sites: usize,
    antiperiodic: bool,
    flux: f64,
    field: f64,
    beta: f64,
    m: usize,
    n0: i32,
    eta: f64,
    t: f64,
}

fn point() -> impl Strategy<Value = Point> {
    (
        prop::sample::select(vec![4usize, 6, 8]),
        any::<bool>(),
        -0.6f64..0.6,
        -0.5f64..0.5,
        0.2f64..12.0,
        0usize..8,
        -2i32..3,
        0.05f64..2.0,
        0.1f64..80.0,
    )
        .prop_map(|(sites, antiperiodic, flux, field, beta, m, n0, eta, t)| Point {
            sites,
            antiperiodic,
            flux,
            field,
            beta,
            m: m % sites,
            n0,
            eta,
            t,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engine_matches_oracle(pt in point()) {
        let parity = if pt.antiperiodic { FermionParity::Antiperiodic } else { FermionParity::Periodic };
        let params = ModelParams::free(pt.sites).with_parity(parity).with_flux(pt.flux).with_field(pt.field);
        let temp = Temperature::Finite(pt.beta);
        let spec = diagonalize(&params, &SectorSelection::All, temp).unwrap();
        let ff = FreeFermion::new(&params).unwrap();
        let p = momentum(pt.m, pt.sites);
        let p0 = 2.0 * PI * pt.n0 as f64 / pt.beta;
        let tol = 1e-9;

        let pairs = [
            (value(&canonical_h(&spec, pt.eta, p, pt.t).unwrap()), ff.canonical_h(temp, pt.eta, p, pt.t).unwrap(), "canonical_H"),
            (value(&canonical_h(&spec, pt.eta, p, f64::INFINITY).unwrap()), ff.canonical_h(temp, pt.eta, p, f64::INFINITY).unwrap(), "canonical_H(∞)"),
            (value(&canonical_k(&spec, pt.eta, p, pt.t, KKernel::Oscillatory).unwrap()), ff.canonical_k(temp, pt.eta, p, pt.t, KKernel::Oscillatory).unwrap(), "canonical_K"),
            (value(&canonical_k(&spec, pt.eta, p, pt.t, KKernel::Damped).unwrap()), ff.canonical_k(temp, pt.eta, p, pt.t, KKernel::Damped).unwrap(), "canonical_K damped"),
            (value(&euclidean_h(&spec, p0, p).unwrap()), ff.euclidean_h(temp, p0, p).unwrap(), "euclidean_H"),
            (value(&euclidean_k(&spec, p0, p).unwrap()), ff.euclidean_k(temp, p0, p).unwrap(), "euclidean_K"),
            (value(&thermal_drude_regularized(&spec, pt.eta).unwrap()), ff.thermal_drude(temp).unwrap(), "thermal_D"),
            (c64::new(kinetic_density(&spec).unwrap(), 0.0), c64::new(ff.kinetic_density(temp).unwrap(), 0.0), "kinetic"),
            (realtime_commutator(&spec, p, pt.t).unwrap(), ff.correlator(Kind::JJ, p, TimeArg::Commutator(pt.t), temp).unwrap(), "commutator"),
            (
                complex_time_correlator(&spec, p, c64::new(pt.t, -pt.beta / 3.0), ComplexTimeDomain::Strip).unwrap(),
                ff.correlator(Kind::JJ, p, TimeArg::Complex(c64::new(pt.t, -pt.beta / 3.0)), temp).unwrap(),
                "complex time",
            ),
        ];
        for (ed, oracle, what) in pairs {
            prop_assert!(close(ed, oracle, tol), "{}: {} vs {}", what, ed, oracle);
        }
        for kind in [Kind::JRho, Kind::RhoJ] {
            let ed = matsubara_correlator(&spec, kind, p, p0).unwrap();
            let oracle = ff.correlator(kind, p, TimeArg::Matsubara(p0), temp).unwrap();
            prop_assert!(close(ed, oracle, tol), "{:?}: {} vs {}", kind, ed, oracle);
        }
    }
}
