mod common;

use std::f64::consts::PI;

use common::*;
use faer::c64;
use proptest::prelude::*;
use xxzlab::model::*;
use xxzlab::spectra::{diagonalize, hermitian_eigenvalues, SectorSelection, SpectralData, Temperature};
use xxzlab::transport::*;

fn spectrum(params: &ModelParams, beta: f64) -> SpectralData {
    diagonalize(params, &SectorSelection::All, Temperature::Finite(beta)).unwrap()
}

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> c64) -> c64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + k as f64 * h) * w;
    }
    acc * (h / 3.0)
}

fn dense_kinetic(params: &ModelParams, dense: &DenseSystem, beta: f64) -> f64 {
    trace(&(dense.gibbs(beta) * fourier(params.sites, 0.0, |x| kinetic_site(params, x)))).re
}

/// `tr ρ [A(t), B]`.
fn dense_commutator(dense: &DenseSystem, rho: &faer::Mat<c64>, a: &faer::Mat<c64>, b: &faer::Mat<c64>, t: f64) -> c64 {
    let at = dense.evolve(a, c64::new(t, 0.0));
    trace(&(rho * (&at * b - b * &at)))
}

/// Lowest eigenvalue of the dense Hamiltonian restricted to `N` particles.
fn dense_sector_ground(params: &ModelParams, n: usize) -> f64 {
    let s = FockSector::new(params.sites, n).unwrap();
    hermitian_eigenvalues(&restrict(&hamiltonian(params), &s)).unwrap()[0]
}

#[test]
fn canonical_h_matches_quadrature() {
    let params = ModelParams::xxz(6, 0.3);
    let (beta, eta, t_max) = (4.0, 0.3, 12.0);
    let spec = spectrum(&params, beta);
    let dense = DenseSystem::new(&params);
    let rho = dense.gibbs(beta);
    for m in [1, 2, 3] {
        let p = 2.0 * PI * m as f64 / 6.0;
        let a = current_fourier(&params, p);
        let b = current_fourier(&params, -p);
        let integral = simpson(-t_max, 0.0, 3000, |t| dense_commutator(&dense, &rho, &a, &b, t) * (eta * t).exp());
        let want = (c64::new(0.0, 1.0) * integral).re / 6.0 - dense_kinetic(&params, &dense, beta) / 6.0;
        let got = canonical_h(&spec, eta, p, t_max).unwrap();
        assert!((got.value - want).abs() < 1e-7, "p = {p}: {} vs {want}", got.value);
        assert!(got.is_real());
        assert_eq!(got.meta.p, Some(p));
    }
}

#[test]
fn canonical_h_short_time_limit_is_minus_kinetic_density() {
    let params = ModelParams::xxz(6, 0.3).with_perturbation(0.2, &[(2, 1.0)]);
    let spec = spectrum(&params, 3.0);
    let k = kinetic_density(&spec).unwrap();
    let h = canonical_h(&spec, 0.5, PI / 3.0, 1e-9).unwrap();
    assert!((h.value + k).abs() < 1e-8);
    // ⟨Δ⟩ is negative in a thermal state of a hopping band
    assert!(k < 0.0);
}

#[test]
fn canonical_h_long_time_limit() {
    let params = ModelParams::xxz(6, -0.2);
    let spec = spectrum(&params, 2.0);
    let a = canonical_h(&spec, 0.1, PI / 3.0, 400.0).unwrap();
    let b = canonical_h(&spec, 0.1, PI / 3.0, f64::INFINITY).unwrap();
    assert!((a.value - b.value).abs() < 1e-12);
    assert_eq!(b.meta.time, None);
}

#[test]
fn canonical_k_matches_quadrature() {
    let params = ModelParams::xxz(6, 0.3);
    let (beta, eta, t_max) = (4.0, 0.3, 12.0);
    let spec = spectrum(&params, beta);
    let dense = DenseSystem::new(&params);
    let rho = dense.gibbs(beta);
    let p = 2.0 * PI / 6.0;
    let a = density_fourier(&params, p);
    let b = density_fourier(&params, -p);
    let osc = simpson(-t_max, 0.0, 3000, |t| dense_commutator(&dense, &rho, &a, &b, t) * c64::from_polar(1.0, -eta * t));
    let damp = simpson(-t_max, 0.0, 3000, |t| dense_commutator(&dense, &rho, &a, &b, t) * (eta * t).exp());
    let minus_i = c64::new(0.0, -1.0) / 6.0;
    for (kernel, integral) in [(KKernel::Oscillatory, osc), (KKernel::Damped, damp)] {
        let want = minus_i * integral;
        let got = canonical_k(&spec, eta, p, t_max, kernel).unwrap();
        assert!((c64::new(got.value, got.imag) - want).norm() < 1e-7, "{kernel:?}");
    }
    // only the damped kernel is real at finite T
    assert!(canonical_k(&spec, eta, p, t_max, KKernel::Damped).unwrap().is_real());
}

#[test]
fn canonical_k_vanishes_at_zero_momentum() {
    let spec = spectrum(&ModelParams::xxz(6, 0.5).with_field(0.3), 2.0);
    for t in [0.5, 10.0, 300.0] {
        for kernel in [KKernel::Oscillatory, KKernel::Damped] {
            let k = canonical_k(&spec, 0.2, 0.0, t, kernel).unwrap();
            assert!(k.value.abs() < 1e-14 && k.imag.abs() < 1e-14);
        }
    }
    assert!(canonical_k(&spec, 0.2, 0.0, f64::INFINITY, KKernel::Oscillatory).is_err());
}

#[test]
fn regulator_is_validated() {
    let spec = spectrum(&ModelParams::xxz(4, 0.2), 2.0);
    assert!(canonical_h(&spec, 0.0, PI / 2.0, 1.0).is_err());
    assert!(canonical_h(&spec, -0.1, PI / 2.0, 1.0).is_err());
    assert!(canonical_h(&spec, 0.1, PI / 2.0, 0.0).is_err());
    assert!(thermal_drude_regularized(&spec, 0.0).is_err());
    assert!(matches!(canonical_h(&spec, 0.1, 0.3, 1.0), Err(xxzlab::Error::MomentumGrid { .. })));
}

#[test]
fn static_euclidean_h_vanishes_away_from_zero_momentum() {
    let params = ModelParams::xxz(8, 0.4).with_perturbation(0.2, &[(2, 1.0)]);
    let spec = spectrum(&params, 4.0);
    for m in 1..8 {
        let h = euclidean_h(&spec, 0.0, 2.0 * PI * m as f64 / 8.0).unwrap();
        assert!(h.value.abs() < 1e-10, "m = {m}: {}", h.value);
    }
    // at p = 0 the current is not conserved once λ ≠ 0, so the static value is finite
    let d = euclidean_h(&spec, 0.0, 0.0).unwrap();
    assert!(d.value.abs() > 1e-3);
}

#[test]
fn euclidean_k_vanishes_at_zero_momentum_and_finite_frequency() {
    let beta = 3.0;
    let spec = spectrum(&ModelParams::xxz(6, -0.5), beta);
    for n in [1, 2, -3] {
        let k = euclidean_k(&spec, 2.0 * PI * n as f64 / beta, 0.0).unwrap();
        assert!(k.value.abs() < 1e-10 && k.imag.abs() < 1e-10);
    }
    assert!(matches!(euclidean_k(&spec, 1.0, 0.0), Err(xxzlab::Error::MatsubaraGrid { .. })));
}

#[test]
fn thermal_drude_of_free_fermions_is_eta_independent() {
    let params = ModelParams::free(6);
    let spec = spectrum(&params, 2.0);
    let a = thermal_drude_regularized(&spec, 0.05).unwrap();
    let b = thermal_drude_regularized(&spec, 2.0).unwrap();
    assert!((a.value - b.value).abs() < 1e-12);
    // 𝒥 is conserved: the whole value is the Kubo part β⟨𝒥²⟩/L
    let dense = DenseSystem::new(&params);
    let j = current_fourier(&params, 0.0);
    let want = 2.0 * trace(&(dense.gibbs(2.0) * &j * &j)).re / 6.0;
    assert!((a.value - want).abs() < 1e-11);
}

#[test]
fn thermal_drude_matches_quadrature() {
    let params = ModelParams::xxz(6, 0.3);
    let (beta, eta) = (2.0, 0.4);
    let spec = spectrum(&params, beta);
    let dense = DenseSystem::new(&params);
    let rho = dense.gibbs(beta);
    let j = current_fourier(&params, 0.0);
    let kubo = simpson(0.0, beta, 400, |tau| trace(&(&rho * dense.evolve(&j, c64::new(0.0, -tau)) * &j)));
    // e^{ηs} is below 1e−15 past s = −90
    let tail = simpson(-90.0, 0.0, 20000, |s| dense_commutator(&dense, &rho, &j, &j, s) * (eta * s).exp());
    let want = (kubo + c64::new(0.0, 1.0) * tail) / 6.0;
    let got = thermal_drude_regularized(&spec, eta).unwrap();
    assert!((c64::new(got.value, got.imag) - want).norm() < 1e-7, "{} vs {want}", got.value);
}

#[test]
fn free_twist_drude_at_six_sites() {
    // E₀(φ) = −Σ_{k occupied} cos(k + φ) gives D = (1/L)Σ cos k = (1 + 2·½)/6
    let params = ModelParams::free(6);
    for method in [TwistMethod::FiniteDifference, TwistMethod::Perturbation2] {
        let d = twist_drude(&params, method, TwistOptions::default()).unwrap();
        assert!((d.value - 1.0 / 3.0).abs() < 1e-8, "{method:?}: {}", d.value);
    }
}

#[test]
fn twist_drude_matches_dense_stencil() {
    let params = ModelParams::xxz(6, 0.3).with_perturbation(0.1, &[(2, 1.0)]);
    let h = 2e-3;
    let e = |phi: f64| dense_sector_ground(&params.clone().with_flux(phi), 3);
    let d2 = (-e(2.0 * h) + 16.0 * e(h) - 30.0 * e(0.0) + 16.0 * e(-h) - e(-2.0 * h)) / (12.0 * h * h);
    let got = twist_drude(&params, TwistMethod::FiniteDifference, TwistOptions::default()).unwrap();
    assert!((got.value - d2 / 6.0).abs() < 1e-6, "{} vs {}", got.value, d2 / 6.0);
}

#[test]
fn twist_methods_agree() {
    let params = ModelParams::xxz(10, 0.4);
    let fd = twist_drude(&params, TwistMethod::FiniteDifference, TwistOptions::default()).unwrap();
    let pt = twist_drude(&params, TwistMethod::Perturbation2, TwistOptions::default()).unwrap();
    assert!((fd.value - pt.value).abs() <= 1e-7, "{} vs {}", fd.value, pt.value);
    // E₀(φ) = E₀(−φ) leaves no odd part in the stencil
    assert!(fd.meta.warnings.iter().all(|w| !w.contains("odd part")), "{:?}", fd.meta.warnings);
}

#[test]
fn degenerate_ground_state_refuses_perturbation_theory() {
    // even N on a periodic ring: the Fermi points are half-filled shells
    let params = ModelParams::free(8);
    let err = twist_drude(&params, TwistMethod::Perturbation2, TwistOptions::default());
    assert!(matches!(err, Err(xxzlab::Error::DegenerateGround(_))));
    let fd = twist_drude(&params, TwistMethod::FiniteDifference, TwistOptions::default()).unwrap();
    assert!(fd.meta.warnings.iter().any(|w| w.contains("degenerate")));
    assert!(twist_drude(&params.with_boundary(Boundary::Open), TwistMethod::FiniteDifference, TwistOptions::default()).is_err());
}

#[test]
fn field_susceptibility_from_sector_energies() {
    let params = ModelParams::xxz(6, 0.3);
    let (e2, e3, e4) = (dense_sector_ground(&params, 2), dense_sector_ground(&params, 3), dense_sector_ground(&params, 4));
    let want = -1.0 / (6.0 * (e4 + e2 - 2.0 * e3));
    let got = field_susceptibility(&params, FieldMethod::SectorLegendre { delta_n: 1 }, FieldOptions::default()).unwrap();
    assert!((got.value - want).abs() < 1e-12);
    assert!(got.value < 0.0);
    assert!(field_susceptibility(&params, FieldMethod::SectorLegendre { delta_n: 4 }, FieldOptions::default()).is_err());
}

#[test]
fn field_curvature_inside_one_sector_vanishes() {
    let params = ModelParams::xxz(6, 0.3);
    let fd = field_susceptibility(&params, FieldMethod::FiniteDifference, FieldOptions::default()).unwrap();
    let pt = field_susceptibility(&params, FieldMethod::Perturbation2, FieldOptions::default()).unwrap();
    assert!(fd.value.abs() < 1e-7);
    assert!((fd.value - pt.value).abs() < 1e-7);
    assert!(fd.meta.warnings.iter().all(|w| !w.contains("odd part")));
    // a base field on the first level crossing is reported; the probe adds h(N − 3)
    let e3 = dense_sector_ground(&params, 3);
    let crossing = (4..=6)
        .map(|n| (e3 - dense_sector_ground(&params, n)) / (n as f64 - 3.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let at = field_susceptibility(
        &params.clone().with_probe(crossing, ProbeSign::Plus),
        FieldMethod::FiniteDifference,
        FieldOptions::default(),
    )
    .unwrap();
    assert!(at.meta.warnings.iter().any(|w| w.contains("level crossing")), "{:?}", at.meta.warnings);
}

#[test]
fn bethe_forms_at_free_point() {
    let f = bethe_closed_forms(0.0, 1.0).unwrap();
    assert!((f.mu - PI / 2.0).abs() < 1e-15);
    assert!((f.v - 2.0).abs() < 1e-14);
    assert!((f.k_exp - 1.0).abs() < 1e-14);
    assert!((f.d_b - 2.0 / PI).abs() < 1e-14);
    assert!((f.kappa_b - 1.0 / (2.0 * PI)).abs() < 1e-14);
    let lat = BetheForms::lattice(0.0, 1.0).unwrap();
    assert!((lat.v - 1.0).abs() < 1e-14 && (lat.d_b - 1.0 / PI).abs() < 1e-14 && (lat.kappa_b - 1.0 / PI).abs() < 1e-14);
    assert_eq!(lat.to_lattice(), lat);
    assert!(matches!(bethe_closed_forms(1.0, 1.0), Err(xxzlab::Error::OutOfPhase(_))));
    assert!(bethe_closed_forms(-1.2, 1.0).is_err());
    assert!(BetheForms::at_mu(PI, 1.0).is_err());
}

#[test]
fn bethe_drude_weight_decreases_toward_the_isotropic_point() {
    let mut last = f64::INFINITY;
    for k in 1..100 {
        let mu = PI / 2.0 + (PI / 2.0) * k as f64 / 100.0;
        let f = BetheForms::at_mu(mu, 1.0).unwrap();
        assert!(f.d_b < last);
        last = f.d_b;
    }
    // sin μ and π − μ vanish together, so the closed form stays finite at the boundary
    let near = BetheForms::at_mu(PI - 1e-6, 1.0).unwrap();
    assert!((near.d_b - 0.5).abs() < 1e-5);
}

#[test]
fn inverse_size_fit_recovers_a_quadratic() {
    let sizes = [8, 10, 12, 14];
    let values: Vec<f64> = sizes.iter().map(|&l| 0.3 - 1.2 / l as f64 + 4.0 / (l * l) as f64).collect();
    let fit = fit_inverse_l(&sizes, &values).unwrap();
    assert!((fit.a - 0.3).abs() < 1e-10 && (fit.b + 1.2).abs() < 1e-9 && (fit.c - 4.0).abs() < 1e-8);
    assert!((fit.eval(20.0) - (0.3 - 0.06 + 0.01)).abs() < 1e-10);
    assert!(fit_inverse_l(&sizes[..2], &values[..2]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn haldane_relations_hold(mu in 1e-3f64..(PI - 1e-3), j in 0.2f64..3.0) {
        for f in [BetheForms::at_mu(mu, j).unwrap(), BetheForms::at_mu(mu, j).unwrap().to_lattice()] {
            let (r1, r2) = haldane_residuals(&f);
            prop_assert!(r1.abs() <= 1e-12 * f.v * f.v && r2.abs() <= 1e-12 * f.d_b.max(1.0));
        }
    }

    #[test]
    fn transport_values_are_real(
        lambda in -0.9f64..0.9,
        eps in 0.0f64..0.3,
        beta in 0.3f64..10.0,
        eta in 0.05f64..2.0,
        t in 0.5f64..50.0,
        m in 0usize..6,
        n in -2i32..3,
    ) {
        let params = ModelParams::xxz(6, lambda).with_perturbation(eps, &[(2, 1.0)]);
        let spec = spectrum(&params, beta);
        let p = 2.0 * PI * m as f64 / 6.0;
        let p0 = 2.0 * PI * n as f64 / beta;
        let results = [
            canonical_h(&spec, eta, p, t).unwrap(),
            canonical_h(&spec, eta, p, f64::INFINITY).unwrap(),
            canonical_k(&spec, eta, p, t, KKernel::Damped).unwrap(),
            euclidean_h(&spec, p0, p).unwrap(),
            euclidean_k(&spec, p0, p).unwrap(),
            thermal_drude_regularized(&spec, eta).unwrap(),
        ];
        for r in &results {
            prop_assert!(r.is_real(), "{:?}: {} + {}i", r.formulation, r.value, r.imag);
        }
        prop_assert!(euclidean_k(&spec, 0.0, p).unwrap().value >= -1e-12);
    }
}
