//! Translation between a target open system and the simulator: temperature
//! scaling, sensitivity, control fields and sizing estimates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, invalid, Result};
use crate::units::{uev_to_ghz, MU_B, PLANCK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingSpec {
    /// T (K).
    pub target_temperature: f64,
    /// T_qs (K).
    pub simulator_temperature: f64,
    /// γ = T/T_qs.
    pub gamma_ratio: f64,
    /// k_s ∈ (0, 1).
    pub sensitivity: f64,
    /// t_c (μeV).
    pub tunnel_coupling: f64,
    pub g_factor: f64,
    /// σ_ε (μeV).
    pub sigma_epsilon: f64,
}

impl MappingSpec {
    pub fn new(
        target_temperature: f64,
        simulator_temperature: f64,
        sensitivity: f64,
        tunnel_coupling: f64,
        g_factor: f64,
        sigma_epsilon: f64,
    ) -> Result<Self> {
        ensure_positive("target_temperature", target_temperature)?;
        ensure_positive("simulator_temperature", simulator_temperature)?;
        let spec = Self {
            target_temperature,
            simulator_temperature,
            gamma_ratio: target_temperature / simulator_temperature,
            sensitivity,
            tunnel_coupling,
            g_factor,
            sigma_epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("target_temperature", self.target_temperature)?;
        ensure_positive("simulator_temperature", self.simulator_temperature)?;
        let g = self.target_temperature / self.simulator_temperature;
        if (self.gamma_ratio - g).abs() > 1e-12 * g {
            return Err(invalid("gamma_ratio", "must equal T/T_qs"));
        }
        if !(self.sensitivity > 0.0 && self.sensitivity < 1.0) {
            return Err(invalid(
                "sensitivity",
                format!("k_s must lie in (0, 1), got {}", self.sensitivity),
            ));
        }
        ensure_positive("tunnel_coupling", self.tunnel_coupling)?;
        ensure_positive("g_factor", self.g_factor)?;
        ensure_finite("sigma_epsilon", self.sigma_epsilon)?;
        if self.sigma_epsilon < 0.0 {
            return Err(invalid("sigma_epsilon", "must be ≥ 0"));
        }
        Ok(())
    }
}

/// k_s = ½(1 + ε_d/√(ε_d² + 4t_c²)), equal to cos²θ.
pub fn sensitivity_of(detuning: f64, tunnel_coupling: f64) -> Result<f64> {
    ensure_finite("detuning", detuning)?;
    ensure_positive("tunnel_coupling", tunnel_coupling)?;
    let r = (detuning * detuning + 4.0 * tunnel_coupling * tunnel_coupling).sqrt();
    Ok(0.5 * (1.0 + detuning / r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlFields {
    /// ε_d (μeV).
    pub detuning: f64,
    /// B_avg (T).
    pub b_avg: f64,
    /// ΔB (T).
    pub delta_b: f64,
}

/// Detuning and magnetic fields that realise a target (Δ, η) in the
/// {T−, S0} subspace at sensitivity k_s.
pub fn control_fields(spec: &MappingSpec, delta: f64, eta: f64) -> Result<ControlFields> {
    spec.validate()?;
    ensure_finite("delta", delta)?;
    ensure_finite("eta", eta)?;
    let k = spec.sensitivity;
    let tc = spec.tunnel_coupling;
    let gmu = spec.g_factor * MU_B;
    let gamma = spec.gamma_ratio;
    Ok(ControlFields {
        detuning: tc * (2.0 * k - 1.0) / (k * (1.0 - k)).sqrt(),
        b_avg: (tc * (k / (1.0 - k)).sqrt() + delta / gamma) / gmu,
        delta_b: eta / (gmu * gamma) * (8.0 / (1.0 - k)).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCaps {
    /// T
    pub b_avg_max: f64,
    /// T
    pub delta_b_max: f64,
}

impl Default for FeasibilityCaps {
    fn default() -> Self {
        Self {
            b_avg_max: 5.0,
            delta_b_max: 0.1,
        }
    }
}

/// Hardware warnings for a set of control fields; empty when feasible.
pub fn feasibility_warnings(fields: &ControlFields, caps: &FeasibilityCaps) -> Vec<String> {
    let mut w = Vec::new();
    if fields.b_avg < 0.0 {
        w.push(format!(
            "B_avg = {:.4} T is negative (inverted target); reverse the field direction",
            fields.b_avg
        ));
    }
    if fields.b_avg.abs() > caps.b_avg_max {
        w.push(format!(
            "|B_avg| = {:.4} T exceeds the {:.2} T cap",
            fields.b_avg.abs(),
            caps.b_avg_max
        ));
    }
    if fields.delta_b.abs() > caps.delta_b_max {
        w.push(format!(
            "|ΔB| = {:.2} mT exceeds the {:.1} mT cap",
            1e3 * fields.delta_b.abs(),
            1e3 * caps.delta_b_max
        ));
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceBudget {
    /// Simulator dephasing time τ_d (ns).
    pub tau_d_ns: f64,
    /// Corresponding target-frame time τ_d/γ (ps).
    pub tau_target_ps: f64,
}

/// τ_d = 2πħ/(k_s σ_ε) and its target-frame image τ_d/γ.
pub fn coherence_budget(spec: &MappingSpec) -> Result<CoherenceBudget> {
    spec.validate()?;
    ensure_positive("sigma_epsilon", spec.sigma_epsilon)?;
    let tau_d_ns = PLANCK / (spec.sensitivity * spec.sigma_epsilon);
    Ok(CoherenceBudget {
        tau_d_ns,
        tau_target_ps: 1e3 * tau_d_ns / spec.gamma_ratio,
    })
}

/// Largest η (μeV) reachable with a field gradient ΔB (T): γ g μ_B |ΔB|/(2√2).
pub fn eta_upper_limit(gamma_ratio: f64, g_factor: f64, delta_b_max: f64) -> Result<f64> {
    ensure_positive("gamma_ratio", gamma_ratio)?;
    ensure_positive("g_factor", g_factor)?;
    ensure_finite("delta_b_max", delta_b_max)?;
    Ok(gamma_ratio * g_factor * MU_B * delta_b_max.abs() / (2.0 * std::f64::consts::SQRT_2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantityKind {
    /// Value in ps.
    Time,
    /// Value in μeV.
    Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetQuantity {
    pub label: String,
    pub kind: QuantityKind,
    pub value: f64,
}

impl TargetQuantity {
    pub fn time_ps(label: &str, value: f64) -> Self {
        Self {
            label: label.into(),
            kind: QuantityKind::Time,
            value,
        }
    }

    pub fn energy_uev(label: &str, value: f64) -> Self {
        Self {
            label: label.into(),
            kind: QuantityKind::Energy,
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub label: String,
    pub kind: QuantityKind,
    /// Target value (ps or μeV).
    pub target: f64,
    /// Simulator value: times in ps, energies in μeV.
    pub simulator: f64,
    /// E/h of simulator energies in GHz.
    pub frequency_ghz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub gamma_ratio: f64,
    pub rows: Vec<ScaleRow>,
}

/// Times are multiplied by γ, energies divided by γ.
pub fn scale_report(gamma_ratio: f64, quantities: &[TargetQuantity]) -> Result<ScaleReport> {
    ensure_positive("gamma_ratio", gamma_ratio)?;
    let rows = quantities
        .iter()
        .map(|q| {
            let (simulator, frequency_ghz) = match q.kind {
                QuantityKind::Time => (q.value * gamma_ratio, None),
                QuantityKind::Energy => {
                    let e = q.value / gamma_ratio;
                    (e, Some(uev_to_ghz(e)))
                }
            };
            ScaleRow {
                label: q.label.clone(),
                kind: q.kind,
                target: q.value,
                simulator,
                frequency_ghz,
            }
        })
        .collect();
    Ok(ScaleReport { gamma_ratio, rows })
}

/// Target quantities of a photosynthetic-complex style problem at 300 K.
pub fn reference_quantities() -> Vec<TargetQuantity> {
    vec![
        TargetQuantity::time_ps("simulation time", 10.0),
        TargetQuantity::time_ps("time resolution", 2e-3),
        TargetQuantity::energy_uev("energy span", 125_000.0),
        TargetQuantity::energy_uev("coupling", 25_000.0),
        TargetQuantity::energy_uev("bath frequency", 250_000.0),
        TargetQuantity::energy_uev("reorganization energy", 100_000.0),
        TargetQuantity::energy_uev("energy resolution", 125.0),
    ]
}

fn format_time(ps: f64) -> String {
    if ps >= 1e3 {
        format!("{:.4} ns", ps / 1e3)
    } else if ps >= 1.0 {
        format!("{ps:.4} ps")
    } else {
        format!("{:.4} fs", ps * 1e3)
    }
}

fn format_energy(uev: f64) -> String {
    if uev >= 1e3 {
        format!("{:.4} meV", uev / 1e3)
    } else if uev >= 1.0 {
        format!("{uev:.4} μeV")
    } else {
        format!("{:.4} neV", uev * 1e3)
    }
}

fn format_frequency(ghz: f64) -> String {
    if ghz >= 1.0 {
        format!("{ghz:.4} GHz")
    } else {
        format!("{:.4} MHz", ghz * 1e3)
    }
}

impl ScaleReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scaling with γ = {:.6e}", self.gamma_ratio);
        let _ = writeln!(
            s,
            "{:<24} {:>14} {:>8} {:>14} {:>14}",
            "quantity", "target", "scaling", "simulator", "frequency"
        );
        for r in &self.rows {
            let (t, sc, sim) = match r.kind {
                QuantityKind::Time => (format_time(r.target), "×γ", format_time(r.simulator)),
                QuantityKind::Energy => (format_energy(r.target), "×1/γ", format_energy(r.simulator)),
            };
            let f = r.frequency_ghz.map(format_frequency).unwrap_or_default();
            let _ = writeln!(s, "{:<24} {:>14} {:>8} {:>14} {:>14}", r.label, t, sc, sim, f);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_dqd, choose_delta_q, project_subspace, CouplingKind, DqdParameters};
    use proptest::prelude::*;

    fn spec(k: f64, g: f64) -> MappingSpec {
        MappingSpec::new(300.0, 0.06, k, 100.0, g, 2.0).unwrap()
    }

    #[test]
    fn sensitivity_examples() {
        assert_eq!(sensitivity_of(0.0, 10.0).unwrap(), 0.5);
        assert!(sensitivity_of(-1e12, 10.0).unwrap() < 1e-12);
        assert!(sensitivity_of(1e12, 10.0).unwrap() > 1.0 - 1e-12);
        assert!((sensitivity_of(40.82, 100.0).unwrap() - 0.6).abs() < 1e-3);
        assert!(sensitivity_of(1.0, 0.0).is_err());
    }

    #[test]
    fn control_field_examples() {
        let f = control_fields(&spec(0.6, 2.0), 10_000.0, 5_000.0).unwrap();
        assert!((f.detuning - 40.82).abs() < 1e-2);
        assert!((f.b_avg - 1.08).abs() < 0.01);
        assert!((f.delta_b - 0.0386).abs() < 2e-4);
        let f = control_fields(&spec(0.6, 0.43), 10_000.0, 5_000.0).unwrap();
        assert!((f.b_avg - 5.00).abs() < 0.02);
        assert!((f.delta_b - 0.179).abs() < 1e-3);
        assert_eq!(control_fields(&spec(0.5, 2.0), 1.0, 1.0).unwrap().detuning, 0.0);
    }

    #[test]
    fn negative_splitting_warns() {
        let f = control_fields(&spec(0.6, 2.0), -2e7, 0.0).unwrap();
        assert!(f.b_avg < 0.0);
        assert!(!feasibility_warnings(&f, &FeasibilityCaps::default()).is_empty());
    }

    #[test]
    fn coherence_examples() {
        let b = coherence_budget(&spec(0.6, 2.0)).unwrap();
        assert!((b.tau_d_ns - 3.4).abs() < 0.1);
        let s = MappingSpec::new(300.0, 1.0, 0.6, 100.0, 2.0, 2.0).unwrap();
        assert!((coherence_budget(&s).unwrap().tau_target_ps - 11.0).abs() < 0.5);
        let d = coherence_budget(&spec(0.3, 2.0)).unwrap().tau_d_ns;
        assert!((d / b.tau_d_ns - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eta_limit_examples() {
        let a = eta_upper_limit(300.0, 2.0, 0.1).unwrap();
        assert!((a - 1200.0).abs() < 0.05 * 1200.0);
        let b = eta_upper_limit(3e4, 2.0, 0.1).unwrap();
        assert!((b - 120_000.0).abs() < 0.05 * 120_000.0);
        assert_eq!(eta_upper_limit(300.0, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn scale_report_examples() {
        let r = scale_report(5000.0, &reference_quantities()).unwrap();
        assert!((r.rows[0].simulator - 50_000.0).abs() < 1e-9);
        assert!((r.rows[2].simulator - 25.0).abs() < 1e-12);
        let id = scale_report(1.0, &reference_quantities()).unwrap();
        assert!(id.rows.iter().all(|r| r.simulator == r.target));
        assert!(r.render().contains("50.0000 ns"));
    }

    fn random_spec() -> impl Strategy<Value = (MappingSpec, f64, f64)> {
        (
            0.02..0.98_f64,
            1.0..300.0_f64,
            0.1..3.0_f64,
            10.0..1e5_f64,
            -5e4..5e4_f64,
            -2e4..2e4_f64,
        )
            .prop_map(|(k, tc, g, gamma, delta, eta)| {
                (
                    MappingSpec::new(300.0, 300.0 / gamma, k, tc, g, 1.0).unwrap(),
                    delta,
                    eta,
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sensitivity_round_trip((s, d, e) in random_spec()) {
            let f = control_fields(&s, d, e).unwrap();
            prop_assert!((sensitivity_of(f.detuning, s.tunnel_coupling).unwrap() - s.sensitivity).abs() < 1e-10);
        }

        #[test]
        fn subspace_consistency((s, d, e) in random_spec()) {
            let f = control_fields(&s, d, e).unwrap();
            let mut p = DqdParameters {
                detuning: f.detuning,
                tunnel_coupling: s.tunnel_coupling,
                b_avg: f.b_avg,
                delta_b: f.delta_b,
                g_factor: s.g_factor,
                lever_arm: 0.1,
                delta_q: 0.0,
            };
            let m = build_dqd(&p).unwrap();
            p.delta_q = choose_delta_q(CouplingKind::DisplacedOscillator, 0.1, m.mixing_angle).delta_q;
            let sub = project_subspace(&m, &p);
            let (dt, et) = (d / s.gamma_ratio, e / s.gamma_ratio);
            // absolute floor from cancellation against t_c-sized terms
            let floor = 1e-12 * s.tunnel_coupling / (s.sensitivity * (1.0 - s.sensitivity)).sqrt();
            prop_assert!((sub.delta_qs - dt).abs() <= 1e-9 * dt.abs() + floor);
            prop_assert!((sub.eta_qs - et).abs() <= 1e-9 * et.abs() + floor);
        }

        #[test]
        fn monotone_in_sensitivity(k1 in 0.02..0.97_f64, dk in 1e-4..0.01_f64, tc in 1.0..300.0_f64) {
            let a = control_fields(&MappingSpec::new(300.0, 0.06, k1, tc, 2.0, 1.0).unwrap(), 1e4, 5e3).unwrap();
            let b = control_fields(&MappingSpec::new(300.0, 0.06, k1 + dk, tc, 2.0, 1.0).unwrap(), 1e4, 5e3).unwrap();
            prop_assert!(b.detuning > a.detuning);
            prop_assert!(b.delta_b > a.delta_b);
        }
    }
}
