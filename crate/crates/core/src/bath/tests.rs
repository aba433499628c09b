use super::*;
use crate::units::HBAR;
use proptest::prelude::*;
use std::f64::consts::PI;

fn dl() -> SpectralDensity {
    SpectralDensity::drude_lorentz(5000.0, 10_000.0).unwrap()
}

fn room() -> BathCorrelation {
    BathCorrelation::new(dl(), 300.0).unwrap()
}

/// Time in ns for a reduced time τ·ħ/ω_c.
fn t_over_wc(x: f64, omega_c: f64) -> f64 {
    x / omega_c * HBAR
}

#[test]
fn drude_lorentz_values() {
    let sd = dl();
    assert_eq!(sd.evaluate(0.0).unwrap(), 0.0);
    assert!((sd.evaluate(10_000.0).unwrap() - 1591.549).abs() < 1e-3);
    assert!(sd.evaluate(-1.0).is_err());
    let (a, b) = (sd.evaluate(1e8).unwrap(), sd.evaluate(2e8).unwrap());
    assert!((a / b - 2.0).abs() < 1e-6);
}

#[test]
fn tabulated_validation() {
    assert!(SpectralDensity::tabulated(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
    assert!(SpectralDensity::tabulated(vec![0.0, 1.0], vec![0.0, -1.0]).is_err());
    let t = SpectralDensity::tabulated(vec![0.0, 2.0, 4.0], vec![0.0, 2.0, 0.0]).unwrap();
    assert_eq!(t.evaluate(1.0).unwrap(), 1.0);
    assert_eq!(t.evaluate(5.0).unwrap(), 0.0);
}

#[test]
fn zero_time_drude_lorentz_diverges() {
    assert!(matches!(correlation_quadrature(&room(), 0.0), Err(Error::Divergent(_))));
    assert!(correlation_quadrature(&room(), -1e-6).is_err());
}

#[test]
fn imaginary_part_is_exact_exponential() {
    let bc = room();
    for x in [0.1, 1.0, 3.0] {
        let c = correlation_quadrature(&bc, t_over_wc(x, 10_000.0)).unwrap();
        let exact = -5000.0 * 10_000.0 * (-x).exp();
        assert!((c.im - exact).abs() < 1e-7 * exact.abs(), "x={x}: {} vs {exact}", c.im);
    }
}

#[test]
fn two_rules_agree() {
    let bc = room();
    let tol = Tolerance::new(1e-10, 1e-10);
    for x in [0.05, 0.5, 2.0] {
        let t = t_over_wc(x, 10_000.0);
        let a = correlation_quadrature_with(&bc, t, Rule::GaussKronrod, tol).unwrap();
        let b = correlation_quadrature_with(&bc, t, Rule::DoubleExponential, tol).unwrap();
        assert!((a - b).norm() < 1e-6 * a.norm(), "x={x}: {a} vs {b}");
    }
}

#[test]
fn classical_drude_limit() {
    // k_B T = 100 ħω_c
    let omega_c = 10.0;
    let temp = 100.0 * omega_c / K_B;
    let lambda = 3.0;
    let bc = BathCorrelation::new(SpectralDensity::drude_lorentz(lambda, omega_c).unwrap(), temp).unwrap();
    for x in [0.5, 1.0, 2.0] {
        let c = correlation_quadrature(&bc, t_over_wc(x, omega_c)).unwrap();
        let classical = 2.0 * lambda * K_B * temp * (-x).exp();
        assert!((c.re - classical).abs() < 0.02 * classical, "x={x}");
    }
}

#[test]
fn pade_pole_values() {
    let p = pade_poles(6).unwrap();
    assert!((p.xi[0] - 2.0 * PI).abs() < 1e-7);
    assert!((p.xi[5] - 116.37393).abs() < 1e-4);
    assert!((p.kappa[0] - 1.0).abs() < 1e-7);
    assert!((p.kappa[5] - 36.71707).abs() < 1e-4);
}

#[test]
fn pade_approximates_bose_function() {
    let p = pade_poles(6).unwrap();
    for i in 1..=200 {
        let x = 0.05 * i as f64;
        let approx = 1.0 / x
            + 0.5
            + p.xi
                .iter()
                .zip(&p.kappa)
                .map(|(xi, k)| 2.0 * k * x / (x * x + xi * xi))
                .sum::<f64>();
        let exact = 1.0 / (1.0 - (-x).exp());
        assert!((approx - exact).abs() < 1e-11 * exact, "x={x}");
    }
}

#[test]
fn term_count() {
    for n in [0, 1, 3, 6] {
        assert_eq!(pade_decompose(&room(), n).unwrap().len(), n + 1);
    }
}

#[test]
fn decomposition_rejects_non_drude() {
    let bc = BathCorrelation::new(SpectralDensity::tabulated(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap(), 1.0).unwrap();
    assert!(pade_decompose(&bc, 2).is_err());
}

#[test]
fn high_temperature_single_term() {
    let omega_c = 10.0;
    let temp = 100.0 * omega_c / K_B;
    let bc = BathCorrelation::new(SpectralDensity::drude_lorentz(2.0, omega_c).unwrap(), temp).unwrap();
    let d = pade_decompose(&bc, 0).unwrap();
    for i in 1..=40 {
        let t = t_over_wc(5.0 * i as f64 / 40.0, omega_c);
        let q = correlation_quadrature(&bc, t).unwrap();
        assert!((d.evaluate(t) - q).norm() < 0.01 * q.norm(), "i={i}");
    }
}

#[test]
fn scaled_bath_matches_oracle() {
    let gamma = 5000.0;
    let omega_c = 10_000.0 / gamma;
    let bc = BathCorrelation::new(SpectralDensity::drude_lorentz(5000.0 / gamma, omega_c).unwrap(), 0.06).unwrap();
    let d = pade_decompose(&bc, 6).unwrap();
    for x in [0.05, 0.3, 1.0, 4.0, 10.0] {
        let t = t_over_wc(x, omega_c);
        let q = correlation_quadrature(&bc, t).unwrap();
        assert!((d.evaluate(t) - q).norm() < 1e-3 * q.norm(), "x={x}");
    }
}

#[test]
fn detailed_balance() {
    let bc = room();
    let d = pade_decompose(&bc, 6).unwrap();
    let beta = bc.beta();
    for bw in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let w = bw / beta;
        let ratio = d.spectrum(-w) / d.spectrum(w);
        assert!((ratio / (-bw).exp() - 1.0).abs() < 0.01, "βω={bw}");
    }
}

#[test]
fn positivity_at_origin() {
    let d = pade_decompose(&room(), 6).unwrap();
    let c0 = d.evaluate(0.0);
    assert!(c0.re > 0.0);
    for i in 1..100 {
        let t = t_over_wc(0.05 * i as f64, 10_000.0);
        assert!(d.evaluate(t).norm() <= c0.norm());
    }
}

#[test]
fn terminator_vanishes_for_pade_but_not_for_bare_drude() {
    assert_eq!(pade_decompose(&room(), 6).unwrap().delta_strength, 0.0);
    assert!(pade_decompose(&room(), 0).unwrap().delta_strength > 0.0);
}

#[test]
fn splitting_function_values() {
    assert_eq!(splitting_function(0.0, 3.0), 1.0);
    assert_eq!(splitting_function(3.0, 3.0), 0.0);
    assert!(splitting_function(3.0 - 1e-9, 3.0) < 1e-17);
    let (low, _) = split_spectral_density(&dl(), 10_000.0).unwrap();
    let w = 5000.0;
    let expected = 9.0 / 16.0 * dl().value(w);
    assert!((low.value(w) - expected).abs() < 1e-12 * expected);
    assert!(split_spectral_density(&dl(), 0.0).is_err());
}

fn noise_coupling(n: f64) -> NoiseCoupling {
    NoiseCoupling {
        lever_arm: 0.1,
        sensitivity: 0.6,
        n,
    }
}

#[test]
fn zero_low_frequency_part_gives_no_noise() {
    let zero = SpectralDensity::tabulated(vec![0.0, 1e4], vec![0.0, 0.0]).unwrap();
    for t in [0.0, 1.0, 5.0] {
        assert_eq!(
            classical_noise_correlation(&zero, 0.06, 5000.0, noise_coupling(1.0), t).unwrap(),
            0.0
        );
    }
}

#[test]
fn noise_is_even_and_cross_checked() {
    let (low, _) = split_spectral_density(&dl(), 10_000.0).unwrap();
    let c = noise_coupling(1.0);
    let a = classical_noise_correlation(&low, 0.06, 5000.0, c, 0.3).unwrap();
    let b = classical_noise_correlation(&low, 0.06, 5000.0, c, -0.3).unwrap();
    assert_eq!(a, b);
    let tol = Tolerance::new(1e-30, 1e-10);
    let gk = classical_noise_correlation_with(&low, 0.06, 5000.0, c, 0.0, Rule::GaussKronrod, tol).unwrap();
    let de = classical_noise_correlation_with(&low, 0.06, 5000.0, c, 0.0, Rule::DoubleExponential, tol).unwrap();
    assert!(gk > 0.0);
    assert!((gk - de).abs() < 1e-5 * gk);
}

#[test]
fn noise_routes_agree() {
    let (low, _) = split_spectral_density(&dl(), 10_000.0).unwrap();
    for n in [1.0, 2.0] {
        for t in [0.0, 0.05, 0.4] {
            let a = classical_noise_correlation(&low, 0.06, 5000.0, noise_coupling(n), t).unwrap();
            let b = classical_noise_via_correlation(&low, 0.06, 5000.0, noise_coupling(n), t).unwrap();
            assert!((a - b).abs() < 1e-7 * a.abs().max(1e-30), "n={n} t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn noise_rejects_non_integrable_low_end() {
    let flat = SpectralDensity::tabulated(vec![0.0, 1e4], vec![1.0, 1.0]).unwrap();
    assert!(matches!(
        classical_noise_correlation(&flat, 0.06, 5000.0, noise_coupling(1.0), 0.0),
        Err(Error::Divergent(_))
    ));
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.csv");
    let grid: Vec<f64> = (0..50).map(|i| 500.0 * i as f64).collect();
    write_spectral_density_csv(&path, &dl(), &grid).unwrap();
    let back = read_spectral_density_csv(&path).unwrap();
    for &w in &grid {
        assert!((back.value(w) - dl().value(w)).abs() <= 1e-10 * dl().value(w).max(1e-300));
    }
    std::fs::write(&path, "1,2\n3,4\n").unwrap();
    assert!(read_spectral_density_csv(&path).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn split_partition(w in 0.0..1e5_f64, ws in 1.0..5e4_f64) {
        let (low, high) = split_spectral_density(&dl(), ws).unwrap();
        let j = dl().value(w);
        prop_assert!((low.value(w) + high.value(w) - j).abs() <= 1e-12 * j.max(1e-300));
    }

    #[test]
    fn drude_nonnegative(w in 0.0..1e9_f64, lambda in 0.0..1e4_f64, wc in 1e-3..1e5_f64) {
        prop_assert!(SpectralDensity::drude_lorentz(lambda, wc).unwrap().value(w) >= 0.0);
    }
}

#[test]
fn dephasing_exponent_classical_limit() {
    let omega_c = 10.0;
    let temp = 100.0 * omega_c / K_B;
    let lambda = 3.0;
    let bc = BathCorrelation::new(SpectralDensity::drude_lorentz(lambda, omega_c).unwrap(), temp).unwrap();
    assert_eq!(dephasing_exponent(&bc, 0.0).unwrap(), 0.0);
    for x in [0.2, 1.0, 4.0] {
        let g = dephasing_exponent(&bc, t_over_wc(x, omega_c)).unwrap();
        let classical = 2.0 * lambda * K_B * temp / (omega_c * omega_c) * ((-x).exp() + x - 1.0);
        assert!((g - classical).abs() < 0.02 * classical, "x={x}: {g} vs {classical}");
    }
}
