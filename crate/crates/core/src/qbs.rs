//! Quantum bath synthesizer: arrays of series RLC resonators whose voltage
//! fluctuations act as the simulator's bath.
//!
//! Circuit frequencies and dampings are carried as energies ħΩ in μeV,
//! impedances in ohms and capacitances in farads. A unit contributes
//!
//! ```text
//! Re Z_j(Ω) = 2Λ_j · 2Γ_jΩ² / ((Ω_j² − Ω²)² + 4Γ_j²Ω²),   Λ_j = Z_{0j}Ω_j/2
//! ```
//!
//! which peaks at `R_j = Λ_j/Γ_j` on resonance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bath::SpectralDensity;
use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::nnls::nnls;
use crate::units::{rad_per_s_to_uev, uev_to_rad_per_s, HBAR_OVER_E2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RlcUnit {
    /// Resonance ħΩ_j (μeV).
    #[serde(rename = "omega_uev")]
    pub omega_j: f64,
    /// Characteristic impedance √(L/C) (Ω).
    #[serde(rename = "z0_ohm")]
    pub z0: f64,
    /// Damping ħΓ_j (μeV).
    #[serde(rename = "gamma_uev")]
    pub gamma_j: f64,
    pub series_count: u32,
    /// Parasitic capacitance added to C_j (F).
    #[serde(rename = "parasitic_f")]
    pub parasitic_c: f64,
}

impl RlcUnit {
    pub fn new(omega_j: f64, z0: f64, gamma_j: f64) -> Result<Self> {
        let u = Self {
            omega_j,
            z0,
            gamma_j,
            series_count: 1,
            parasitic_c: 0.0,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn with_parasitic(mut self, c_p: f64) -> Self {
        self.parasitic_c = c_p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("omega_j", self.omega_j)?;
        ensure_positive("z0", self.z0)?;
        ensure_finite("gamma_j", self.gamma_j)?;
        if self.gamma_j < 0.0 {
            return Err(invalid("gamma_j", "damping must be ≥ 0"));
        }
        if self.series_count == 0 {
            return Err(invalid("series_count", "need at least one unit"));
        }
        ensure_finite("parasitic_c", self.parasitic_c)?;
        if self.parasitic_c < 0.0 {
            return Err(invalid("parasitic_c", "capacitance must be ≥ 0"));
        }
        Ok(())
    }

    /// C_j = 1/(Z_0 Ω_j) in farads.
    pub fn capacitance(&self) -> f64 {
        1.0 / (self.z0 * uev_to_rad_per_s(self.omega_j))
    }

    /// L_j = Z_0/Ω_j in henries.
    pub fn inductance(&self) -> f64 {
        self.z0 / uev_to_rad_per_s(self.omega_j)
    }

    /// `(ħΩ', Z_0')` after adding the parasitic capacitance to C_j.
    pub fn effective(&self) -> (f64, f64) {
        if self.parasitic_c == 0.0 {
            return (self.omega_j, self.z0);
        }
        let l = self.inductance();
        let c = self.capacitance() + self.parasitic_c;
        (rad_per_s_to_uev(1.0 / (l * c).sqrt()), (l / c).sqrt())
    }

    /// Λ_j = Z_0Ω_j/2 (Ω·μeV), after the parasitic remap.
    pub fn reorganization(&self) -> f64 {
        let (w, z) = self.effective();
        0.5 * z * w
    }

    /// Peak resistance R_j = Λ_j/Γ_j (Ω) of one unit.
    pub fn resistance(&self) -> f64 {
        self.reorganization() / self.gamma_j
    }
}

/// Real part of an ideal LC impedance, a delta line at Ω_0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcLine {
    /// ħΩ_0 (μeV).
    pub position: f64,
    /// Weight πΩ_0Z_0/2 (Ω·μeV).
    pub weight: f64,
}

pub fn lc_impedance_real(z0: f64, omega0: f64) -> LcLine {
    LcLine {
        position: omega0,
        weight: 0.5 * PI * omega0 * z0,
    }
}

/// Re Z of one unit times its series count (Ω); divider scaling is applied
/// at the design level.
pub fn rlc_impedance_real(unit: &RlcUnit, omega: f64) -> f64 {
    let (w0, z0) = unit.effective();
    let g = unit.gamma_j;
    let lambda = 0.5 * z0 * w0;
    let o2 = omega * omega;
    let d = w0 * w0 - o2;
    let denom = d * d + 4.0 * g * g * o2;
    if denom == 0.0 {
        // undamped unit exactly on resonance
        return 0.0;
    }
    unit.series_count as f64 * 4.0 * lambda * g * o2 / denom
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QbsDesign {
    pub units: Vec<RlcUnit>,
    /// Per-unit attenuation in (0, 1] applied to Re Z_j.
    pub divider_scales: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct UnitRecord {
    #[serde(flatten)]
    unit: RlcUnit,
    divider_scale: f64,
}

impl QbsDesign {
    pub fn new(units: Vec<RlcUnit>) -> Result<Self> {
        let n = units.len();
        Self::with_dividers(units, vec![1.0; n])
    }

    pub fn with_dividers(units: Vec<RlcUnit>, divider_scales: Vec<f64>) -> Result<Self> {
        let d = Self { units, divider_scales };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            return Err(invalid("units", "a design needs at least one unit"));
        }
        if self.divider_scales.len() != self.units.len() {
            return Err(invalid("divider_scales", "one scale per unit"));
        }
        for u in &self.units {
            u.validate()?;
        }
        if self.divider_scales.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(invalid("divider_scales", "each scale must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn unit_impedance_real(&self, j: usize, omega: f64) -> f64 {
        self.divider_scales[j] * rlc_impedance_real(&self.units[j], omega)
    }

    /// Total Re Z(Ω) (Ω), ħΩ in μeV.
    pub fn impedance_real(&self, omega: f64) -> f64 {
        (0..self.units.len()).map(|j| self.unit_impedance_real(j, omega)).sum()
    }

    pub fn effective_resonances(&self) -> Vec<f64> {
        self.units.iter().map(|u| u.effective().0).collect()
    }

    pub fn max_damping(&self) -> f64 {
        self.units.iter().fold(0.0, |m, u| m.max(u.gamma_j))
    }

    pub fn with_parasitic(&self, c_p: f64) -> Self {
        Self {
            units: self.units.iter().map(|u| u.with_parasitic(c_p)).collect(),
            divider_scales: self.divider_scales.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let records: Vec<UnitRecord> = self
            .units
            .iter()
            .zip(&self.divider_scales)
            .map(|(&unit, &divider_scale)| UnitRecord { unit, divider_scale })
            .collect();
        Ok(serde_json::to_string_pretty(&records)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<UnitRecord> = serde_json::from_str(text)?;
        let (units, scales) = records.into_iter().map(|r| (r.unit, r.divider_scale)).unzip();
        Self::with_dividers(units, scales)
    }
}

/// Target-frame spectral density `κ²ω·Re Z(ω/γ)/(πħ/e²)` synthesized by a
/// design, with κ in eV/V.
pub fn qbs_to_spectral_density(design: &QbsDesign, kappa: f64, gamma_ratio: f64) -> Result<SpectralDensity> {
    SpectralDensity::rlc_synthesized(design.clone(), kappa, gamma_ratio)
}

/// Characteristic impedance 2(ħ/e²)·s·(n/(αk_s))² realising Huang–Rhys
/// factor `s` with lever arm α in eV/V.
pub fn size_impedance(huang_rhys: f64, lever_arm: f64, k_s: f64, n: f64) -> Result<f64> {
    ensure_positive("huang_rhys", huang_rhys)?;
    ensure_positive("lever_arm", lever_arm)?;
    ensure_positive("k_s", k_s)?;
    ensure_positive("n", n)?;
    let r = n / (lever_arm * k_s);
    Ok(2.0 * HBAR_OVER_E2 * huang_rhys * r * r)
}

pub const DEFAULT_SERIES_CAP: u32 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPlan {
    pub design: QbsDesign,
    /// Indices of units that need more than the cap.
    pub infeasible: Vec<usize>,
}

/// Splits every unit into `ceil(Z_total/max)` identical series units of
/// impedance `Z_total/count`, so Re Z of the design is unchanged.
pub fn plan_series_counts(design: &QbsDesign, max_unit_impedance: f64, cap: u32) -> Result<SeriesPlan> {
    ensure_positive("max_unit_impedance", max_unit_impedance)?;
    let mut out = design.clone();
    let mut infeasible = Vec::new();
    for (j, u) in out.units.iter_mut().enumerate() {
        let total = u.z0 * u.series_count as f64;
        let count = required_series_count(total, max_unit_impedance);
        if count > cap as f64 {
            infeasible.push(j);
        }
        if count > u32::MAX as f64 {
            return Err(invalid("max_unit_impedance", "series count overflows"));
        }
        u.series_count = count as u32;
        u.z0 = total / count;
    }
    Ok(SeriesPlan {
        design: out,
        infeasible,
    })
}

/// `ceil(required/max)`, at least 1, robust to round-off just above an
/// integer ratio.
pub fn required_series_count(required: f64, max_unit_impedance: f64) -> f64 {
    let r = required / max_unit_impedance;
    let c = r.ceil();
    let c = if c - r > 1.0 - 1e-12 { c - 1.0 } else { c };
    c.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConstraints {
    /// Uniform damping ħΓ in the target frame (μeV).
    pub gamma: f64,
    /// Coupling κ = αk_s/n in eV/V.
    pub kappa: f64,
    pub gamma_ratio: f64,
    /// Number of frequency samples in the least-squares problem.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QbsFit {
    /// Target-frame resonances (μeV).
    pub omegas: Vec<f64>,
    /// Fitted Z_0 per unit (Ω); zero for units switched off by the fit.
    pub z0: Vec<f64>,
    pub constraints: FitConstraints,
    /// Target-frame sample grid (μeV) and the target on it.
    pub grid: Vec<f64>,
    pub target: Vec<f64>,
    pub fitted: Vec<f64>,
    /// max |fit − target| / max target over the grid.
    pub residual_max: f64,
    /// ‖fit − target‖₂ / ‖target‖₂ over the grid.
    pub residual_l2: f64,
}

impl QbsFit {
    /// Circuit design built from the units with nonzero weight.
    pub fn design(&self) -> Result<QbsDesign> {
        let g = self.constraints.gamma_ratio;
        let units = self
            .omegas
            .iter()
            .zip(&self.z0)
            .filter(|(_, &z)| z > 0.0)
            .map(|(&w, &z)| RlcUnit::new(w / g, z, self.constraints.gamma / g))
            .collect::<Result<Vec<_>>>()?;
        if units.is_empty() {
            return Err(Error::Fit("all fitted weights are zero".into()));
        }
        QbsDesign::new(units)
    }

    /// Fraction of the total weight carried by unit `j`.
    pub fn weight_fraction(&self, j: usize) -> f64 {
        let total: f64 = self.z0.iter().sum();
        if total > 0.0 {
            self.z0[j] / total
        } else {
            0.0
        }
    }
}

/// Places `n_units` resonators uniformly on `band` (target-frame μeV, both
/// ends included) and fits their Z_0 by nonnegative least squares to the
/// target spectral density, at fixed uniform damping.
pub fn fit_qbs(
    target: &SpectralDensity,
    n_units: usize,
    band: (f64, f64),
    constraints: FitConstraints,
) -> Result<QbsFit> {
    if n_units == 0 {
        return Err(invalid("n_units", "need at least one unit"));
    }
    let (lo, hi) = band;
    ensure_positive("band.lo", lo)?;
    ensure_positive("gamma", constraints.gamma)?;
    ensure_positive("kappa", constraints.kappa)?;
    ensure_positive("gamma_ratio", constraints.gamma_ratio)?;
    if !(hi >= lo) || !hi.is_finite() || (n_units > 1 && hi == lo) {
        return Err(Error::Fit(format!("degenerate band [{lo}, {hi}]")));
    }
    if constraints.samples < n_units {
        return Err(Error::Fit("fewer samples than units".into()));
    }
    let omegas: Vec<f64> = if n_units == 1 {
        vec![lo]
    } else {
        (0..n_units)
            .map(|j| lo + (hi - lo) * j as f64 / (n_units - 1) as f64)
            .collect()
    };
    let g = constraints.gamma_ratio;
    let grid_end = hi + 0.5 * (hi - lo) / n_units.max(1) as f64;
    let m = constraints.samples;
    let grid: Vec<f64> = (1..=m).map(|i| grid_end * i as f64 / m as f64).collect();
    let target_vals = grid.iter().map(|&w| target.evaluate(w)).collect::<Result<Vec<_>>>()?;

    let prefactor = constraints.kappa * constraints.kappa / (PI * HBAR_OVER_E2);
    let basis_units = omegas
        .iter()
        .map(|&w| RlcUnit::new(w / g, 1.0, constraints.gamma / g))
        .collect::<Result<Vec<_>>>()?;
    let a = DMatrix::from_fn(m, n_units, |i, j| {
        prefactor * grid[i] * rlc_impedance_real(&basis_units[j], grid[i] / g)
    });
    let b = DVector::from_vec(target_vals.clone());
    let z0 = nnls(&a, &b)?;
    let fitted = &a * &z0;

    let peak = target_vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (max_dev, sq_dev, sq_t) = fitted
        .iter()
        .zip(&target_vals)
        .fold((0.0_f64, 0.0, 0.0), |(md, sd, st), (f, t)| {
            (md.max((f - t).abs()), sd + (f - t) * (f - t), st + t * t)
        });
    let (residual_max, residual_l2) = if peak > 0.0 {
        (max_dev / peak, (sq_dev / sq_t).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(QbsFit {
        omegas,
        z0: z0.iter().copied().collect(),
        constraints,
        grid,
        target: target_vals,
        fitted: fitted.iter().copied().collect(),
        residual_max,
        residual_l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{self, Rule, Tolerance};
    use proptest::prelude::*;

    fn unit() -> RlcUnit {
        RlcUnit::new(20.0, 5000.0, 0.4).unwrap()
    }

    #[test]
    fn resonance_equals_resistance() {
        let u = unit();
        let r = u.reorganization() / u.gamma_j;
        assert!((rlc_impedance_real(&u, u.omega_j) - r).abs() <= 1e-10 * r);
    }

    #[test]
    fn zero_frequency_vanishes() {
        assert_eq!(rlc_impedance_real(&unit(), 0.0), 0.0);
    }

    #[test]
    fn zero_parasitic_is_identity() {
        let u = unit();
        assert_eq!(u.effective(), (u.omega_j, u.z0));
        assert_eq!(
            rlc_impedance_real(&u.with_parasitic(0.0), 13.0),
            rlc_impedance_real(&u, 13.0)
        );
    }

    #[test]
    fn lc_weight() {
        let l = lc_impedance_real(4000.0, 12.0);
        assert!((l.weight - PI * 12.0 * 4000.0 / 2.0).abs() < 1e-9);
        assert!((lc_impedance_real(8000.0, 12.0).weight - 2.0 * l.weight).abs() < 1e-9);
    }

    #[test]
    fn narrow_lorentzian_recovers_lc_weight() {
        let w0 = 20.0;
        let u = RlcUnit::new(w0, 5000.0, 1e-3).unwrap();
        let pts = [0.0, w0 - 1.0, w0 - 0.01, w0, w0 + 0.01, w0 + 1.0, 10.0 * w0];
        let head = integrate::piecewise(
            Rule::GaussKronrod,
            |w| rlc_impedance_real(&u, w),
            &pts,
            Tolerance::new(1e-9, 1e-10),
        )
        .unwrap()
        .value;
        let tail = integrate::semi_infinite(
            Rule::GaussKronrod,
            |w| rlc_impedance_real(&u, w),
            10.0 * w0,
            Tolerance::new(1e-9, 1e-10),
        )
        .unwrap()
        .value;
        let weight = lc_impedance_real(5000.0, w0).weight;
        assert!(((head + tail) - weight).abs() / weight < 1e-2);
    }

    #[test]
    fn empty_resistance_design_gives_zero_density() {
        // R → 0 ⇔ Γ → ∞ at fixed Λ
        let u = RlcUnit::new(10.0, 3000.0, 1e12).unwrap();
        let sd = qbs_to_spectral_density(&QbsDesign::new(vec![u]).unwrap(), 0.06, 5000.0).unwrap();
        for w in [1.0, 1e3, 5e4, 1e5] {
            assert!(sd.evaluate(w).unwrap() < 1e-6);
        }
    }

    #[test]
    fn kappa_squared_scaling() {
        let d = QbsDesign::new(vec![unit()]).unwrap();
        let a = qbs_to_spectral_density(&d, 0.03, 5000.0).unwrap();
        let b = qbs_to_spectral_density(&d, 0.06, 5000.0).unwrap();
        for w in [1e3, 1e5, 3e5] {
            let (ja, jb) = (a.evaluate(w).unwrap(), b.evaluate(w).unwrap());
            assert!((jb - 4.0 * ja).abs() <= 1e-12 * jb);
        }
    }

    #[test]
    fn sizing_examples() {
        let lo = size_impedance(0.001, 0.1, 0.6, 1.0).unwrap();
        let hi = size_impedance(0.1, 0.1, 0.6, 1.0).unwrap();
        assert!((lo - 2282.35).abs() < 0.1, "{lo}");
        assert!((hi / lo - 100.0).abs() < 1e-9);
    }

    #[test]
    fn series_plans() {
        assert_eq!(required_series_count(2.28e5, 1e4), 23.0);
        assert_eq!(required_series_count(500.0, 1e4), 1.0);
        let d = QbsDesign::new(vec![RlcUnit::new(10.0, 2e5, 0.5).unwrap()]).unwrap();
        let plan = plan_series_counts(&d, 1e3, DEFAULT_SERIES_CAP).unwrap();
        assert_eq!(plan.design.units[0].series_count, 200);
        assert_eq!(plan.infeasible, vec![0]);
        for w in [3.0, 10.0, 14.0] {
            let (a, b) = (d.impedance_real(w), plan.design.impedance_real(w));
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn json_round_trip() {
        let d = QbsDesign::with_dividers(vec![unit(), unit().with_parasitic(2e-15)], vec![1.0, 0.25]).unwrap();
        let text = d.to_json().unwrap();
        assert!(text.contains("omega_uev") && text.contains("divider_scale"));
        assert_eq!(QbsDesign::from_json(&text).unwrap(), d);
    }

    #[test]
    fn fit_recovers_single_lorentzian() {
        let g = 5000.0;
        let omegas: Vec<f64> = (0..10).map(|j| 4000.0 + 4000.0 * j as f64).collect();
        let true_unit = RlcUnit::new(omegas[4] / g, 3000.0, 2000.0 / g).unwrap();
        let target = qbs_to_spectral_density(&QbsDesign::new(vec![true_unit]).unwrap(), 0.06, g).unwrap();
        let fit = fit_qbs(
            &target,
            10,
            (omegas[0], omegas[9]),
            FitConstraints {
                gamma: 2000.0,
                kappa: 0.06,
                gamma_ratio: g,
                samples: 800,
            },
        )
        .unwrap();
        assert!(fit.weight_fraction(4) >= 0.99, "{:?}", fit.z0);
        assert!((fit.z0[4] - 3000.0).abs() < 1.0);
    }

    #[test]
    fn zero_target_fit() {
        let target = SpectralDensity::tabulated(vec![0.0, 1e6], vec![0.0, 0.0]).unwrap();
        let fit = fit_qbs(
            &target,
            5,
            (1e3, 2e4),
            FitConstraints {
                gamma: 1e3,
                kappa: 0.06,
                gamma_ratio: 5000.0,
                samples: 100,
            },
        )
        .unwrap();
        assert!(fit.z0.iter().all(|&z| z == 0.0));
        assert!(fit.design().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn additivity(ws in proptest::collection::vec(0.5..50.0_f64, 1..6), omega in 0.0..100.0_f64) {
            let units: Vec<RlcUnit> = ws.iter().map(|&w| RlcUnit::new(w, 1000.0 + 100.0 * w, 0.1 * w).unwrap()).collect();
            let d = QbsDesign::new(units.clone()).unwrap();
            let sum: f64 = units.iter().map(|u| rlc_impedance_real(u, omega)).sum();
            prop_assert!((d.impedance_real(omega) - sum).abs() <= 1e-12 * sum.max(1e-300));
        }

        #[test]
        fn resonance_identity(w in 0.1..1e3_f64, z in 10.0..1e6_f64, g in 1e-4..10.0_f64) {
            let u = RlcUnit::new(w, z, g * w).unwrap();
            let r = u.reorganization() / u.gamma_j;
            prop_assert!((rlc_impedance_real(&u, w) - r).abs() <= 1e-10 * r);
        }

        #[test]
        fn parasitic_monotone(w in 1.0..100.0_f64, z in 1e3..1e5_f64, c1 in 1e-16..1e-14_f64, dc in 1e-17..1e-14_f64) {
            let u = RlcUnit::new(w, z, 0.05 * w).unwrap();
            let a = u.with_parasitic(c1);
            let b = u.with_parasitic(c1 + dc);
            prop_assert!(b.effective().0 < a.effective().0);
            prop_assert!(b.resistance() < a.resistance());
            prop_assert!(a.resistance() < u.resistance());
        }
    }
}
