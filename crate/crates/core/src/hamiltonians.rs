//! System Hamiltonians and system–bath coupling operators.
//!
//! Two Hilbert spaces appear here:
//!
//! * the two-level target, ordered `{g, e}` so that `σ_z = diag(-1, +1)`;
//! * the two-electron double quantum dot, ordered
//!   `{T+, T0, T-, S0, S1}` (see [`DQD_BASIS`]).
//!
//! The simulation subspace `{T-, S0}` maps onto `{g, e}` in that order, so
//! the 2×2 block of a five-level density matrix taken at
//! `[T_MINUS, S0]` is directly comparable with a target density matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Result};
use crate::linalg::{real_matrix, CMatrix};
use crate::units::MU_B;

pub const GROUND: usize = 0;
pub const EXCITED: usize = 1;

pub const T_PLUS: usize = 0;
pub const T_ZERO: usize = 1;
pub const T_MINUS: usize = 2;
pub const S0: usize = 3;
pub const S1: usize = 4;

/// Labels of the five-level adiabatic basis, in matrix order.
pub const DQD_BASIS: [&str; 5] = ["T+", "T0", "T-", "S0", "S1"];
/// Labels of the two-level target basis, in matrix order.
pub const TWO_LEVEL_BASIS: [&str; 2] = ["g", "e"];
/// Five-level indices of the simulation subspace, aligned with `{g, e}`.
pub const SUBSPACE: [usize; 2] = [T_MINUS, S0];

/// Form of the system operator that couples to the bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// `S = σ_z`
    SpinBoson,
    /// `S = |e⟩⟨e|`
    DisplacedOscillator,
}

impl CouplingKind {
    /// Prefactor `n` of the impedance sizing and classical-noise formulas
    /// (`κ = α k_s / n`).
    pub fn charge_divisor(self) -> f64 {
        match self {
            CouplingKind::DisplacedOscillator => 1.0,
            CouplingKind::SpinBoson => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelSystem {
    /// Level splitting Δ (μeV).
    pub delta: f64,
    /// Inter-level coupling η (μeV).
    pub eta: f64,
    pub coupling_kind: CouplingKind,
}

impl TwoLevelSystem {
    pub fn new(delta: f64, eta: f64, coupling_kind: CouplingKind) -> Result<Self> {
        ensure_finite("delta", delta)?;
        ensure_finite("eta", eta)?;
        Ok(Self {
            delta,
            eta,
            coupling_kind,
        })
    }

    pub fn hamiltonian(&self) -> CMatrix {
        build_two_level(self.delta, self.eta, self.coupling_kind).0
    }

    pub fn coupling_operator(&self) -> CMatrix {
        build_two_level(self.delta, self.eta, self.coupling_kind).1
    }
}

pub fn sigma_z() -> CMatrix {
    real_matrix(2, &[-1.0, 0.0, 0.0, 1.0])
}

pub fn sigma_x() -> CMatrix {
    real_matrix(2, &[0.0, 1.0, 1.0, 0.0])
}

/// Target Hamiltonian `(Δ/2)σ_z + ησ_x` and its bath coupling operator.
pub fn build_two_level(delta: f64, eta: f64, coupling_kind: CouplingKind) -> (CMatrix, CMatrix) {
    let h = sigma_z().scale(0.5 * delta) + sigma_x().scale(eta);
    let s = match coupling_kind {
        CouplingKind::SpinBoson => sigma_z(),
        CouplingKind::DisplacedOscillator => real_matrix(2, &[0.0, 0.0, 0.0, 1.0]),
    };
    (h, s)
}

/// Singlet hybridisation angle θ, continuous through zero detuning.
///
/// Equivalent to `½·atan(2t_c/ε_d)` for `ε_d ≥ 0` and
/// `π/2 + ½·atan(2t_c/ε_d)` for `ε_d < 0`.
pub fn mixing_angle(detuning: f64, tunnel_coupling: f64) -> Result<f64> {
    ensure_finite("detuning", detuning)?;
    ensure_positive("tunnel_coupling", tunnel_coupling)?;
    Ok(0.5 * (2.0 * tunnel_coupling).atan2(detuning))
}

/// Hybridised singlet energies `(ε_S0, ε_S1) = (-R, +R)` with
/// `R = sqrt(ε_d²/4 + t_c²)`.
pub fn singlet_energies(detuning: f64, tunnel_coupling: f64) -> (f64, f64) {
    let r = (0.25 * detuning * detuning + tunnel_coupling * tunnel_coupling).sqrt();
    (-r, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqdParameters {
    /// ε_d (μeV)
    pub detuning: f64,
    /// t_c (μeV)
    pub tunnel_coupling: f64,
    /// B_avg (T)
    pub b_avg: f64,
    /// ΔB (T)
    pub delta_b: f64,
    pub g_factor: f64,
    /// α (eV/V)
    pub lever_arm: f64,
    /// ΔQ, in the same units as α.
    pub delta_q: f64,
}

impl DqdParameters {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("detuning", self.detuning)?;
        ensure_positive("tunnel_coupling", self.tunnel_coupling)?;
        ensure_finite("b_avg", self.b_avg)?;
        ensure_finite("delta_b", self.delta_b)?;
        ensure_positive("g_factor", self.g_factor)?;
        ensure_positive("lever_arm", self.lever_arm)?;
        ensure_finite("delta_q", self.delta_q)?;
        Ok(())
    }

    /// Zeeman energy g μ_B B_avg (μeV).
    pub fn zeeman(&self) -> f64 {
        self.g_factor * MU_B * self.b_avg
    }

    /// Triplet–singlet mixing element g μ_B ΔB / (2√2) (μeV).
    pub fn gradient_coupling(&self) -> f64 {
        self.g_factor * MU_B * self.delta_b / (2.0 * std::f64::consts::SQRT_2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DqdMatrices {
    /// QD Hamiltonian in the adiabatic basis (μeV), zero baseline dropped.
    pub h_qd: CMatrix,
    /// Prefactors of the collective QBS coordinate in the QD–QBS coupling.
    pub coupling_matrix: CMatrix,
    pub mixing_angle: f64,
    pub e_s0: f64,
    pub e_s1: f64,
}

/// Five-level QD Hamiltonian and QD–QBS coupling matrix in the adiabatic
/// basis `{T+, T0, T-, S0, S1}`.
pub fn build_dqd(params: &DqdParameters) -> Result<DqdMatrices> {
    params.validate()?;
    let theta = mixing_angle(params.detuning, params.tunnel_coupling)?;
    let (e_s0, e_s1) = singlet_energies(params.detuning, params.tunnel_coupling);
    let (s, c) = theta.sin_cos();
    let half_eps = 0.5 * params.detuning;
    let ez = params.zeeman();
    let b = params.gradient_coupling();

    #[rustfmt::skip]
    let h = real_matrix(5, &[
        half_eps + ez, 0.0,      0.0,           -b * s,  -b * c,
        0.0,           half_eps, 0.0,           0.0,     0.0,
        0.0,           0.0,      half_eps - ez, b * s,   b * c,
        -b * s,        0.0,      b * s,         e_s0,    0.0,
        -b * c,        0.0,      b * c,         0.0,     e_s1,
    ]);

    let a = params.lever_arm;
    let dq = params.delta_q;
    #[rustfmt::skip]
    let coupling = real_matrix(5, &[
        a - dq, 0.0,    0.0,    0.0,              0.0,
        0.0,    a - dq, 0.0,    0.0,              0.0,
        0.0,    0.0,    a - dq, 0.0,              0.0,
        0.0,    0.0,    0.0,    a * s * s - dq,   a * s * c,
        0.0,    0.0,    0.0,    a * s * c,        a * c * c - dq,
    ]);

    Ok(DqdMatrices {
        h_qd: h,
        coupling_matrix: coupling,
        mixing_angle: theta,
        e_s0,
        e_s1,
    })
}

/// Bias charge ΔQ and the resulting bath response factor κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeDisplacement {
    pub delta_q: f64,
    pub kappa: f64,
}

/// Picks the QBS bias charge that turns the projected QD–QBS coupling into
/// the requested target coupling.
pub fn choose_delta_q(coupling_kind: CouplingKind, lever_arm: f64, mixing_angle: f64) -> ChargeDisplacement {
    let s2 = mixing_angle.sin().powi(2);
    let c2 = mixing_angle.cos().powi(2);
    match coupling_kind {
        CouplingKind::DisplacedOscillator => ChargeDisplacement {
            delta_q: lever_arm,
            kappa: lever_arm * c2,
        },
        CouplingKind::SpinBoson => ChargeDisplacement {
            delta_q: 0.5 * lever_arm * (1.0 + s2),
            kappa: 0.5 * lever_arm * c2,
        },
    }
}

/// Two-level Hamiltonian realised inside `{T-, S0}`.
///
/// Re-embedded as `E0·1 + (Δ_qs/2)σ_z + η_qs σ_x` in `(T-, S0)` order, so
/// `delta_qs` is the S0–T- gap and plays the role of the target Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceHamiltonian {
    pub delta_qs: f64,
    pub eta_qs: f64,
    pub e0: f64,
    /// Diagonal coupling coefficients `(α - ΔQ, α sin²θ - ΔQ)` of T- and S0.
    pub coupling_diag: (f64, f64),
}

impl SubspaceHamiltonian {
    pub fn to_matrix(&self) -> CMatrix {
        let mut m = sigma_z().scale(0.5 * self.delta_qs) + sigma_x().scale(self.eta_qs);
        for i in 0..2 {
            m[(i, i)] += Complex64::new(self.e0, 0.0);
        }
        m
    }
}

pub fn project_subspace(m: &DqdMatrices, params: &DqdParameters) -> SubspaceHamiltonian {
    let theta = m.mixing_angle;
    let ez = params.zeeman();
    let e0 = 0.25 * params.detuning + 0.5 * (m.e_s0 - ez);
    let delta_qs = m.e_s0 - 0.5 * params.detuning + ez;
    let eta_qs = params.gradient_coupling() * theta.sin();
    let a = params.lever_arm;
    let dq = params.delta_q;
    SubspaceHamiltonian {
        delta_qs,
        eta_qs,
        e0,
        coupling_diag: (a - dq, a * theta.sin().powi(2) - dq),
    }
}

/// 2×2 block of a five-level operator on the simulation subspace.
pub fn subspace_block(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| m[(SUBSPACE[i], SUBSPACE[j])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues_hermitian, hermiticity_defect, max_abs};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn params(detuning: f64, t_c: f64, b_avg: f64, delta_b: f64, delta_q: f64) -> DqdParameters {
        DqdParameters {
            detuning,
            tunnel_coupling: t_c,
            b_avg,
            delta_b,
            g_factor: 2.0,
            lever_arm: 0.1,
            delta_q,
        }
    }

    /// k_s(ε_d) = ½(1 + ε_d/√(ε_d² + 4t_c²)), inverted by bisection.
    fn detuning_for_sensitivity(k: f64, t_c: f64) -> f64 {
        let ks = |e: f64| 0.5 * (1.0 + e / (e * e + 4.0 * t_c * t_c).sqrt());
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ks(mid) < k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_two_level_system() {
        let (h, s) = build_two_level(0.0, 0.0, CouplingKind::SpinBoson);
        assert_eq!(max_abs(&h), 0.0);
        assert_eq!(s, sigma_z());
    }

    #[test]
    fn paper_target_eigenvalues() {
        let (h, s) = build_two_level(10_000.0, 5_000.0, CouplingKind::DisplacedOscillator);
        let ev = eigenvalues_hermitian(&h);
        assert!((ev[0] + 7071.067811865).abs() < 1e-6);
        assert!((ev[1] - 7071.067811865).abs() < 1e-6);
        assert_eq!(s[(EXCITED, EXCITED)].re, 1.0);
        assert_eq!(s[(GROUND, GROUND)].re, 0.0);
    }

    #[test]
    fn mixing_angle_limits() {
        assert!((mixing_angle(0.0, 100.0).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!(mixing_angle(1e12, 100.0).unwrap() < 1e-9);
        assert!((mixing_angle(-1e12, 100.0).unwrap() - PI / 2.0).abs() < 1e-9);
        assert!(mixing_angle(1.0, 0.0).is_err());
        assert!(mixing_angle(1.0, -3.0).is_err());
    }

    #[test]
    fn mixing_angle_matches_sensitivity_inverse() {
        let eps = detuning_for_sensitivity(0.6, 100.0);
        assert!((eps - 40.82).abs() < 5e-3);
        let theta = mixing_angle(eps, 100.0).unwrap();
        assert!((theta.cos().powi(2) - 0.6).abs() < 1e-10);
        let theta = mixing_angle(40.82, 100.0).unwrap();
        assert!((theta.cos().powi(2) - 0.6).abs() < 1e-4);
    }

    #[test]
    fn mixing_angle_continuous_at_zero() {
        let t_c = 100.0;
        let l = mixing_angle(-1e-9 * t_c, t_c).unwrap();
        let r = mixing_angle(1e-9 * t_c, t_c).unwrap();
        assert!((l - r).abs() < 1e-8);
    }

    #[test]
    fn no_gradient_decouples_triplets() {
        let m = build_dqd(&params(30.0, 50.0, 1.0, 0.0, 0.1)).unwrap();
        for t in [T_PLUS, T_ZERO, T_MINUS] {
            for s in [S0, S1] {
                assert_eq!(m.h_qd[(t, s)].norm(), 0.0);
                assert_eq!(m.h_qd[(s, t)].norm(), 0.0);
            }
        }
    }

    #[test]
    fn displaced_oscillator_bias_coefficients() {
        let m = build_dqd(&params(-20.0, 60.0, 0.5, 0.01, 0.1)).unwrap();
        let th = m.mixing_angle;
        let a = 0.1;
        assert!((m.coupling_matrix[(S0, S0)].re + a * th.cos().powi(2)).abs() < 1e-15);
        assert!((m.coupling_matrix[(S1, S1)].re + a * th.sin().powi(2)).abs() < 1e-15);
        assert_eq!(m.coupling_matrix[(T_MINUS, T_MINUS)].re, 0.0);
    }

    #[test]
    fn degenerate_point_singlets() {
        let m = build_dqd(&params(0.0, 75.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(m.e_s0, -75.0);
        assert_eq!(m.e_s1, 75.0);
    }

    #[test]
    fn choose_delta_q_examples() {
        let d = choose_delta_q(CouplingKind::DisplacedOscillator, 0.1, 0.77);
        assert_eq!(d.delta_q, 0.1);
        let d = choose_delta_q(CouplingKind::SpinBoson, 0.1, PI / 2.0);
        assert!((d.delta_q - 0.1).abs() < 1e-15);
        assert!(d.kappa.abs() < 1e-15);
        let d = choose_delta_q(CouplingKind::SpinBoson, 0.1, FRAC_PI_4);
        assert!((d.delta_q - 0.075).abs() < 1e-15);
        assert!((d.kappa - 0.025).abs() < 1e-15);
    }

    #[test]
    fn project_without_gradient() {
        let p = params(10.0, 40.0, 0.3, 0.0, 0.1);
        let m = build_dqd(&p).unwrap();
        assert_eq!(project_subspace(&m, &p).eta_qs, 0.0);
    }

    #[test]
    fn projection_reproduces_block() {
        let p = params(-12.0, 35.0, 0.8, 0.02, 0.1);
        let m = build_dqd(&p).unwrap();
        let sub = project_subspace(&m, &p);
        let diff = sub.to_matrix() - subspace_block(&m.h_qd);
        assert!(max_abs(&diff) < 1e-12);
    }

    fn random_params() -> impl Strategy<Value = DqdParameters> {
        (
            -500.0..500.0_f64,
            1.0..300.0_f64,
            -5.0..5.0_f64,
            -0.2..0.2_f64,
            0.1..3.0_f64,
            0.01..0.5_f64,
            -0.5..0.5_f64,
        )
            .prop_map(|(e, t, b, db, g, a, dq)| DqdParameters {
                detuning: e,
                tunnel_coupling: t,
                b_avg: b,
                delta_b: db,
                g_factor: g,
                lever_arm: a,
                delta_q: dq,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn matrices_are_hermitian(p in random_params()) {
            let m = build_dqd(&p).unwrap();
            prop_assert!(hermiticity_defect(&m.h_qd) <= 1e-12 * max_abs(&m.h_qd));
            prop_assert!(hermiticity_defect(&m.coupling_matrix) <= 1e-12 * max_abs(&m.coupling_matrix).max(1e-300));
            prop_assert!(m.mixing_angle > 0.0 && m.mixing_angle < PI);
        }

        #[test]
        fn singlet_block_eigenvalues(e in -1000.0..1000.0_f64, t in 0.1..500.0_f64) {
            let block = real_matrix(2, &[0.5 * e, t, t, -0.5 * e]);
            let ev = eigenvalues_hermitian(&block);
            let (s0, s1) = singlet_energies(e, t);
            prop_assert!((ev[0] - s0).abs() <= 1e-10 * s0.abs());
            prop_assert!((ev[1] - s1).abs() <= 1e-10 * s1.abs());
        }

        #[test]
        fn projection_consistency(p in random_params()) {
            let m = build_dqd(&p).unwrap();
            let sub = project_subspace(&m, &p);
            let block = subspace_block(&m.h_qd);
            let scale = max_abs(&block).max(1.0);
            prop_assert!((block[(0, 0)].re - sub.e0 + 0.5 * sub.delta_qs).abs() < 1e-12 * scale);
            prop_assert!((block[(1, 1)].re - sub.e0 - 0.5 * sub.delta_qs).abs() < 1e-12 * scale);
            prop_assert!((block[(0, 1)].re - sub.eta_qs).abs() < 1e-12 * scale);
            prop_assert!((sub.coupling_diag.0 - m.coupling_matrix[(T_MINUS, T_MINUS)].re).abs() < 1e-15);
            prop_assert!((sub.coupling_diag.1 - m.coupling_matrix[(S0, S0)].re).abs() < 1e-15);
        }

        #[test]
        fn delta_q_selection(mut p in random_params()) {
            let theta = mixing_angle(p.detuning, p.tunnel_coupling).unwrap();
            p.delta_q = choose_delta_q(CouplingKind::DisplacedOscillator, p.lever_arm, theta).delta_q;
            let sub = project_subspace(&build_dqd(&p).unwrap(), &p);
            prop_assert_eq!(sub.coupling_diag.0, 0.0);

            p.delta_q = choose_delta_q(CouplingKind::SpinBoson, p.lever_arm, theta).delta_q;
            let sub = project_subspace(&build_dqd(&p).unwrap(), &p);
            prop_assert!((sub.coupling_diag.0 + sub.coupling_diag.1).abs() < 1e-14);
        }
    }
}
