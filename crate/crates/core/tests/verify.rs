use std::f64::consts::PI;

use faer::c64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xxzlab::correlators::{matsubara_correlator, Kind};
use xxzlab::model::*;
use xxzlab::spectra::{diagonalize, SectorSelection, SpectralData, Temperature};
use xxzlab::transport::{canonical_h, kinetic_density};
use xxzlab::verify::*;

fn spectrum(params: &ModelParams, beta: f64) -> SpectralData {
    diagonalize(params, &SectorSelection::All, Temperature::Finite(beta)).unwrap()
}

#[test]
fn ward_identity_for_the_current_at_zero_frequency() {
    let spec = spectrum(&ModelParams::xxz(8, 0.3), 6.0);
    for m in 1..8 {
        let w = ward_residual(&spec, momentum(m, 8), 0.0, 1).unwrap();
        assert!(w.passes(1e-10), "m = {m}: {w:?}");
        assert!(w.scale > 1e-3);
    }
}

#[test]
fn ward_identity_at_zero_momentum_is_trivial() {
    let spec = spectrum(&ModelParams::xxz(6, 0.3), 2.0);
    for n in -2..=2 {
        let w = ward_residual(&spec, 0.0, 2.0 * PI * n as f64 / 2.0, 0).unwrap();
        assert!(w.passes(1e-9), "{w:?}");
    }
    assert!(ward_residual(&spec, 0.0, 0.0, 2).is_err());
    assert!(ward_residual(&spec, 0.0, 0.5, 0).is_err());
}

#[test]
fn static_current_correlator_is_minus_kinetic_bond() {
    let params = ModelParams::xxz(10, 0.4).with_perturbation(0.1, &[(2, 1.0)]);
    let spec = spectrum(&params, 6.0);
    let mut values = Vec::new();
    for m in 1..10 {
        let p = momentum(m, 10);
        let c = static_jj_identity(&spec, p).unwrap();
        assert!(c.passes(1e-9), "m = {m}: {c:?}");
        values.push(matsubara_correlator(&spec, Kind::JJ, p, 0.0).unwrap().re);
    }
    let spread = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - values.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(spread <= 1e-9);
    // translation invariance: ⟨Δ₀⟩ = ⟨Δ⟩/L
    assert!((values[0] + kinetic_density(&spec).unwrap()).abs() < 1e-10);
    assert!(static_jj_identity(&spec, 0.0).is_err());
}

#[test]
fn contour_decomposition_is_exact() {
    let spec = spectrum(&ModelParams::xxz(8, 0.3), 6.0);
    let w = wick_decomposition(&spec, 0.5, momentum(1, 8), 40.0).unwrap();
    assert!(w.passes(1e-9), "{w:?}");
    assert!((w.eta_beta - 0.5).abs() <= PI / 6.0);
    // the real-time side is the integral inside canonical_H
    let h = canonical_h(&spec, 0.5, momentum(1, 8), 40.0).unwrap();
    let k = kinetic_density(&spec).unwrap();
    assert!(((c64::new(0.0, 1.0) * w.lhs).re - k - h.value).abs() < 1e-12);
}

#[test]
fn matsubara_regulator_has_no_replacement_error() {
    let beta = 8.0;
    let spec = spectrum(&ModelParams::xxz(6, 0.3), beta);
    let eta = 2.0 * PI * 3.0 / beta;
    let w = wick_decomposition(&spec, eta, momentum(1, 6), 10.0).unwrap();
    assert_eq!(w.eta_beta, eta);
    assert_eq!(w.err1, c64::new(0.0, 0.0));
    assert!(wick_decomposition(&spec, 0.5, momentum(1, 6), f64::INFINITY).is_err());
}

#[test]
fn scaling_sweep_finds_one_constant() {
    let params = ModelParams::xxz(6, 0.3);
    let grid = ScalingGrid::standard(6);
    let report = error_scaling_sweep(&params, &grid).unwrap();
    assert!(report.constant_valid(), "{} > {}", report.constant_fit, report.constant_apriori);
    assert_eq!(report.points.len() + report.skipped, 64);
    for pt in &report.points {
        assert!(pt.err1 + pt.err2 <= report.constant_fit * pt.envelope * (1.0 + 1e-12));
    }
    let short = ScalingGrid {
        etas: vec![0.4, 0.8],
        ..grid
    };
    assert!(error_scaling_sweep(&params, &short).is_err());
}

#[test]
fn contour_errors_follow_their_rates() {
    let params = ModelParams::xxz(8, 0.3);
    let p = momentum(1, 8);
    let eta = 0.5;
    let beta_fit = beta_slope_fit(&params, eta, &[8.0, 16.0, 32.0, 64.0, 128.0], p, 80.0).unwrap();
    let slope = beta_fit.fit.expect("β fit").slope;
    assert!((slope + 1.0).abs() <= 0.15, "β slope {slope}");

    let beta = 16.0;
    let eta_b = xxzlab::correlators::matsubara_rounding(eta, Temperature::Finite(beta));
    let time_fit = time_decay_fit(&params, eta, beta, &[5.0, 10.0, 15.0, 20.0], p).unwrap();
    let rate = -time_fit.fit.expect("T fit").slope;
    assert!((rate - eta_b).abs() <= 0.1 * eta_b, "rate {rate} vs {eta_b}");
}

#[test]
fn conserved_current_leaves_no_replacement_error() {
    // at p = 0 on a free ring 𝒥 commutes with H and every commutator term vanishes
    let fit = beta_slope_fit(&ModelParams::free(6), 0.5, &[8.0, 16.0, 32.0, 64.0], 0.0, 20.0).unwrap();
    assert!(fit.fit.is_none());
    assert!(fit.note.is_some());
}

#[test]
fn complex_time_modulus_is_bounded_by_imaginary_axis() {
    let beta = 4.0;
    let spec = spectrum(&ModelParams::xxz(6, 0.3).with_perturbation(0.2, &[(2, 1.0)]), beta);
    let p = momentum(1, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let zs: Vec<c64> = (0..20)
        .map(|_| c64::new(rng.random_range(-20.0..20.0), -rng.random_range(0.0..beta)))
        .collect();
    assert!(complex_bound_probe(&spec, p, &zs).unwrap().holds(1e-10));

    let real: Vec<c64> = (0..40).map(|k| c64::new(k as f64 * 0.5, 0.0)).collect();
    let r = complex_bound_probe(&spec, p, &real).unwrap();
    assert!(r.holds(1e-10));
    assert!(r.samples.iter().all(|s| (s.bound - r.samples[0].bound).abs() < 1e-14));

    let row: Vec<c64> = (0..10).map(|k| c64::new(k as f64, -beta / 2.0)).collect();
    assert!(complex_bound_probe(&spec, p, &row).unwrap().holds(1e-10));

    let zero = complex_bound_probe(&spec, p, &[c64::new(0.0, 0.0)]).unwrap();
    assert!(zero.max_violation.abs() < 1e-14);
    assert!(complex_bound_probe(&spec, p, &[c64::new(0.0, 0.1)]).is_err());
}

#[test]
fn limit_order_gap() {
    let params = ModelParams::xxz(6, 0.3);
    let p = momentum(1, 6);
    let t = 400.0;
    // η fixed, β growing: the gap closes
    let hot = limit_order_probe(&params, p, &[(0.5, 8.0), (0.5, 16.0), (0.5, 32.0), (0.5, 64.0)], t).unwrap();
    for w in hot.windows(2) {
        assert!(w[1].diff < w[0].diff, "{hot:?}");
    }
    // β fixed, η shrinking: the gap does not close
    let cold = limit_order_probe(&params, p, &[(0.8, 8.0), (0.4, 8.0), (0.2, 8.0), (0.1, 8.0)], t).unwrap();
    assert!(cold.last().unwrap().diff >= cold[0].diff, "{cold:?}");
}

#[test]
fn adiabatic_response_without_field_is_equilibrium() {
    let params = ModelParams::xxz(6, 0.2).with_boundary(Boundary::Open);
    let r = adiabatic_response_sim(&params, &AdiabaticOptions::new(0.0, 0.4, 2)).unwrap();
    assert!(r.simulated.abs() < 1e-12 && r.predicted.abs() < 1e-12);
}

#[test]
fn adiabatic_response_is_linear_and_predicted() {
    let params = ModelParams::xxz(6, 0.2).with_boundary(Boundary::Open);
    let full = adiabatic_response_sim(&params, &AdiabaticOptions::new(1e-3, 0.4, 2)).unwrap();
    let half = adiabatic_response_sim(&params, &AdiabaticOptions::new(5e-4, 0.4, 2)).unwrap();
    assert!(full.relative_deviation <= 2e-2, "{full:?}");
    assert!((full.simulated / half.simulated - 2.0).abs() <= 0.02, "{} / {}", full.simulated, half.simulated);
    assert!((full.t_sim - 8.0 / 0.4).abs() < 1e-12);
}

#[test]
fn adiabatic_response_rejects_rings_and_edges() {
    let ring = ModelParams::xxz(6, 0.2);
    assert!(matches!(
        adiabatic_response_sim(&ring, &AdiabaticOptions::new(1e-3, 0.4, 2)),
        Err(xxzlab::Error::NotApplicable(_))
    ));
    let open = ring.with_boundary(Boundary::Open);
    assert!(adiabatic_response_sim(&open, &AdiabaticOptions::new(1e-3, 0.4, 0)).is_err());
    assert!(adiabatic_response_sim(&open, &AdiabaticOptions::new(1e-3, 0.4, 4)).is_err());
    assert!(adiabatic_response_sim(&open, &AdiabaticOptions::new(1e-3, 0.0, 2)).is_err());
}

#[test]
fn linear_fit_recovers_a_line() {
    let xs = [1.0, 2.0, 3.0, 4.0];
    let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 2.0 * x).collect();
    let f = linear_fit(&xs, &ys).unwrap();
    assert!((f.slope + 2.0).abs() < 1e-12 && (f.intercept - 0.5).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
    assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn ward_identity_on_the_grid(lambda in -0.9f64..0.9, eps in 0.0f64..0.3, beta in 0.5f64..8.0, flux in -0.5f64..0.5) {
        let params = ModelParams::xxz(6, lambda).with_perturbation(eps, &[(2, 1.0)]).with_flux(flux);
        let spec = spectrum(&params, beta);
        for m in 0..6 {
            for n in -2..=2 {
                for nu in 0..2 {
                    let w = ward_residual(&spec, momentum(m, 6), 2.0 * PI * n as f64 / beta, nu).unwrap();
                    prop_assert!(w.passes(1e-9), "m = {}, n = {}, ν = {}: {:?}", m, n, nu, w);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn contour_residual_is_exact(
        lambda in -0.9f64..0.9,
        eps in 0.0f64..0.3,
        beta in 0.5f64..40.0,
        eta in 0.05f64..3.0,
        t in 0.1f64..60.0,
        m in 0usize..6,
    ) {
        let params = ModelParams::xxz(6, lambda).with_perturbation(eps, &[(2, 1.0)]);
        let spec = spectrum(&params, beta);
        let w = wick_decomposition(&spec, eta, momentum(m, 6), t).unwrap();
        prop_assert!(w.passes(1e-9), "{:?}", w);
        prop_assert!((w.eta_beta - eta).abs() <= PI / beta + 1e-12);
    }
}
