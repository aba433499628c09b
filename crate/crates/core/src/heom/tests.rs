use super::*;
use crate::bath::{dephasing_exponent, pade_decompose, BathCorrelation, SpectralDensity};
use crate::hamiltonians::{build_two_level, CouplingKind, EXCITED, GROUND};
use crate::linalg::{projector, real_matrix, ONE};
use crate::units::{HBAR, K_B};
use proptest::prelude::*;

fn excited() -> CMatrix {
    projector(2, EXCITED)
}

fn decomposition(lambda: f64, omega_c: f64, temp: f64, n_pade: usize) -> ExponentialBathDecomposition {
    let bc = BathCorrelation::new(SpectralDensity::drude_lorentz(lambda, omega_c).unwrap(), temp).unwrap();
    pade_decompose(&bc, n_pade).unwrap()
}

/// A moderately damped 2-level problem with ħ/μeV-scale dynamics.
fn damped(depth: usize) -> HeomProblem {
    let (h, s) = build_two_level(20.0, 10.0, CouplingKind::SpinBoson);
    HeomProblem::new(h, s, decomposition(4.0, 20.0, 20.0 / K_B, 2), depth, excited()).unwrap()
}

#[test]
fn rabi_oscillation_without_coupling() {
    let eta = 5.0;
    let (h, s) = build_two_level(0.0, eta, CouplingKind::SpinBoson);
    let d = decomposition(10.0, 50.0, 10.0, 2).scaled(0.0);
    let p = HeomProblem::new(h, s, d, 3, excited()).unwrap();
    let t_final = 2.0 * HBAR;
    let trace = propagate(&p, t_final, 1e-3 * HBAR).unwrap();
    for (t, r) in trace.times_ns.iter().zip(&trace.states) {
        let z = r[(1, 1)].re - r[(0, 0)].re;
        let exact = (2.0 * eta * t / HBAR).cos();
        assert!((z - exact).abs() < 1e-10, "t={t}: {z} vs {exact}");
    }
}

#[test]
fn pure_dephasing_matches_cumulant() {
    let (lambda, omega_c) = (3.0, 20.0);
    let temp = 2.0 * omega_c / K_B;
    let bc = BathCorrelation::new(SpectralDensity::drude_lorentz(lambda, omega_c).unwrap(), temp).unwrap();
    let d = pade_decompose(&bc, 3).unwrap();
    let (h, s) = build_two_level(40.0, 0.0, CouplingKind::DisplacedOscillator);
    let rho0 = CMatrix::from_element(2, 2, ONE * 0.5);
    let p = HeomProblem::new(h, s, d, 8, rho0).unwrap();
    let t_final = 0.5 * HBAR;
    let opts = PropagationOptions {
        samples: 50,
        subspace: Some([GROUND, EXCITED]),
        ..Default::default()
    };
    let (trace, _) = propagate_with(&p, t_final, t_final / 2000.0, &opts).unwrap();
    for (t, r) in trace.times_ns.iter().zip(&trace.states) {
        let exact = 0.5 * (-dephasing_exponent(&bc, *t).unwrap()).exp();
        assert!((r[(0, 1)].norm() - exact).abs() < 1e-3, "t={t}");
        assert!((r[(1, 1)].re - 0.5).abs() < 1e-12);
    }
}

#[test]
fn trace_and_hermiticity_preserved() {
    let p = damped(4);
    let trace = propagate(&p, 1.0 * HBAR, 1e-3 * HBAR).unwrap();
    assert_eq!(trace.len(), 501);
    assert!(trace.max_trace_error() < 1e-12);
    assert!(trace.max_hermiticity_defect() < 1e-12);
    assert!(trace.min_eigenvalue() > -1e-6);
}

#[test]
fn halving_dt_changes_little() {
    let p = damped(4);
    let a = propagate(&p, 0.5 * HBAR, 1.5e-3 * HBAR).unwrap();
    let b = propagate(&p, 0.5 * HBAR, 0.75e-3 * HBAR).unwrap();
    assert!(a.max_deviation(&b).unwrap() < 1e-6);
}

#[test]
fn relaxes_toward_gibbs_for_weak_coupling() {
    let (h, s) = build_two_level(20.0, 5.0, CouplingKind::SpinBoson);
    let temp = 20.0 / K_B;
    let d = decomposition(0.2, 40.0, temp, 2);
    let p = HeomProblem::new(h.clone(), s, d, 4, excited()).unwrap();
    let opts = PropagationOptions {
        samples: 100,
        check_dt: true,
        ..Default::default()
    };
    let (_, state) = propagate_with(&p, 300.0 * HBAR, 0.0075 * HBAR, &opts).unwrap();
    let gibbs = thermal_expectation(&h, temp).unwrap();
    let pop = |m: &CMatrix| m[(1, 1)].re;
    let gap = (pop(state.reduced()) - pop(&gibbs)).abs();
    assert!(gap < 0.01, "gap {gap}");
}

#[test]
fn rejects_large_step_and_bad_inputs() {
    let p = damped(4);
    assert!(matches!(propagate(&p, 1.0, 1.0), Err(Error::TimeStep { .. })));
    let mut bad = p.clone();
    bad.rho0 = real_matrix(2, &[0.6, 0.0, 0.0, 0.6]);
    assert!(bad.validate().is_err());
    let mut bad = p.clone();
    bad.depth = 0;
    assert!(bad.validate().is_err());
    let mut bad = p.clone();
    bad.coupling_op = real_matrix(2, &[0.0, 1.0, 0.0, 0.0]);
    assert!(bad.validate().is_err());
    let opts = PropagationOptions {
        memory_limit_bytes: 1000,
        ..Default::default()
    };
    assert!(matches!(
        propagate_with(&p, 0.01, 1e-5, &opts),
        Err(Error::Memory { .. })
    ));
}

#[test]
fn final_state_exposes_ados() {
    let p = damped(3);
    let (trace, state) = propagate_with(&p, 0.2 * HBAR, 1e-3 * HBAR, &PropagationOptions::default()).unwrap();
    assert_eq!(state.ados.len(), hierarchy_size(3, 3).unwrap());
    assert_eq!(state.reduced(), trace.states.last().unwrap());
    assert!(state.ado(&[1, 0, 0]).unwrap().norm() > 0.0);
    assert!(state.ado(&[4, 0, 0]).is_none());
}

#[test]
fn gibbs_examples() {
    let (h, _) = build_two_level(10_000.0, 0.0, CouplingKind::SpinBoson);
    let g = thermal_expectation(&h, 300.0).unwrap();
    let ratio = g[(1, 1)].re / g[(0, 0)].re;
    assert!((ratio - (-10_000.0 / (K_B * 300.0)).exp()).abs() < 1e-12);
    assert!((ratio - 0.679).abs() < 1e-3);
    let mixed = thermal_expectation(&h, f64::INFINITY).unwrap();
    assert!((mixed[(0, 0)].re - 0.5).abs() < 1e-15);
    assert!(thermal_expectation(&h, 0.0).is_err());
    let (h, _) = build_two_level(10.0, 4.0, CouplingKind::SpinBoson);
    let g = thermal_expectation(&h, 0.5).unwrap();
    assert!((&h * &g - &g * &h).iter().all(|z| z.norm() < 1e-12));
}

#[test]
fn csv_round_trip() {
    let p = damped(2);
    let opts = PropagationOptions {
        samples: 20,
        gamma_ratio: 5000.0,
        basis: vec!["g".into(), "e".into()],
        subspace: Some([0, 1]),
        ..Default::default()
    };
    let (trace, _) = propagate_with(&p, 0.1 * HBAR, 1e-3 * HBAR, &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    trace.write_csv(&path).unwrap();
    let back = Trace::read_csv(&path).unwrap();
    assert_eq!(back, trace);
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("time_ns,time_target_ps,p_g,p_e,sigma_z,leakage,rho_0_0_re"));
}

#[test]
fn single_thread_runs_are_bitwise_reproducible() {
    let p = damped(3);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = pool.install(|| propagate(&p, 0.2 * HBAR, 1e-3 * HBAR).unwrap());
    let b = pool.install(|| propagate(&p, 0.2 * HBAR, 1e-3 * HBAR).unwrap());
    let c = propagate(&p, 0.2 * HBAR, 1e-3 * HBAR).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hierarchy_size_is_binomial(k in 0usize..12, l in 0usize..12) {
        let direct = (1..=l).fold(1u128, |acc, i| acc * (k + i) as u128 / i as u128);
        prop_assert_eq!(hierarchy_size(k, l).unwrap() as u128, direct);
    }

    #[test]
    fn gibbs_state_is_a_density_matrix(d in -50.0..50.0_f64, e in -20.0..20.0_f64, t in 0.01..100.0_f64) {
        let (h, _) = build_two_level(d, e, CouplingKind::SpinBoson);
        let g = thermal_expectation(&h, t).unwrap();
        prop_assert!((trace(&g).re - 1.0).abs() < 1e-12);
        prop_assert!(eigenvalues_hermitian(&g)[0] >= -1e-15);
    }
}
