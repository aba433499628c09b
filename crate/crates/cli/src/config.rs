//! TOML run description. Every physical quantity carries its unit in the key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use qdsim::experiments::{Ablation, EmulationConfig, HeomSettings, NoiseGrid, TargetSpec};
use qdsim::hamiltonians::{CouplingKind, TwoLevelSystem};
use qdsim::mapping::{FeasibilityCaps, MappingSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub target: TargetSection,
    pub simulator: SimulatorSection,
    #[serde(default)]
    pub heom: HeomSection,
    pub noise: Option<NoiseSection>,
    pub qbs: Option<QbsSection>,
    #[serde(default)]
    pub caps: CapsSection,
    #[serde(default)]
    pub ablation: Ablation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub delta_mev: f64,
    pub eta_mev: f64,
    #[serde(default = "default_coupling")]
    pub coupling: CouplingKind,
    pub reorganization_mev: f64,
    pub cutoff_mev: f64,
    pub temperature_k: f64,
}

fn default_coupling() -> CouplingKind {
    CouplingKind::DisplacedOscillator
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatorSection {
    pub temperature_mk: f64,
    pub sensitivity: f64,
    pub tunnel_coupling_uev: f64,
    #[serde(default = "default_g")]
    pub g_factor: f64,
    #[serde(default = "default_lever_arm")]
    pub lever_arm_ev_per_v: f64,
    /// Detuning noise used for the coherence budget in `map`.
    #[serde(default)]
    pub sigma_epsilon_uev: f64,
}

fn default_g() -> f64 {
    2.0
}

fn default_lever_arm() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeomSection {
    pub depth: usize,
    pub n_pade: usize,
    pub t_final_ps: f64,
    pub samples: usize,
    /// Target-frame step; chosen per run when absent.
    pub dt_fs: Option<f64>,
    pub terminator: bool,
}

impl Default for HeomSection {
    fn default() -> Self {
        let h = HeomSettings::default();
        Self {
            depth: h.depth,
            n_pade: h.n_pade,
            t_final_ps: h.t_final_ps,
            samples: h.samples,
            dt_fs: None,
            terminator: h.terminator,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub sigma_epsilon_uev: f64,
    pub n_points: usize,
    pub spacing_uev: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QbsSection {
    pub n_units: usize,
    /// Splitting frequency ħω*; the fit targets J_H above it. Defaults to
    /// the cutoff.
    pub split_mev: Option<f64>,
    pub band_mev: [f64; 2],
    pub damping_mev: f64,
    #[serde(default = "default_fit_samples")]
    pub samples: usize,
    #[serde(default)]
    pub parasitic_ff: Vec<f64>,
    pub max_unit_impedance_kohm: Option<f64>,
    #[serde(default = "default_series_cap")]
    pub series_cap: u32,
}

fn default_fit_samples() -> usize {
    400
}

fn default_series_cap() -> u32 {
    qdsim::qbs::DEFAULT_SERIES_CAP
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapsSection {
    pub b_avg_max_t: f64,
    pub delta_b_max_mt: f64,
}

impl Default for CapsSection {
    fn default() -> Self {
        let c = FeasibilityCaps::default();
        Self {
            b_avg_max_t: c.b_avg_max,
            delta_b_max_mt: c.delta_b_max * 1e3,
        }
    }
}

impl CapsSection {
    pub fn caps(&self) -> FeasibilityCaps {
        FeasibilityCaps {
            b_avg_max: self.b_avg_max_t,
            delta_b_max: self.delta_b_max_mt * 1e-3,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    pub fn mapping(&self) -> qdsim::Result<MappingSpec> {
        let s = &self.simulator;
        MappingSpec::new(
            self.target.temperature_k,
            s.temperature_mk * 1e-3,
            s.sensitivity,
            s.tunnel_coupling_uev,
            s.g_factor,
            s.sigma_epsilon_uev,
        )
    }

    pub fn emulation(&self) -> qdsim::Result<EmulationConfig> {
        let t = &self.target;
        let system = TwoLevelSystem::new(t.delta_mev * 1e3, t.eta_mev * 1e3, t.coupling)?;
        let mut map = self.mapping()?;
        // noise lives in its own section for emulation runs
        map.sigma_epsilon = 0.0;
        let h = &self.heom;
        let config = EmulationConfig {
            target: TargetSpec {
                system,
                reorganization: t.reorganization_mev * 1e3,
                cutoff: t.cutoff_mev * 1e3,
                temperature: t.temperature_k,
            },
            map,
            lever_arm: self.simulator.lever_arm_ev_per_v,
            heom: HeomSettings {
                depth: h.depth,
                n_pade: h.n_pade,
                t_final_ps: h.t_final_ps,
                samples: h.samples,
                dt_ps: h.dt_fs.map(|fs| fs * 1e-3),
                terminator: h.terminator,
            },
            noise: self.noise.as_ref().map(|n| NoiseGrid {
                sigma_epsilon: n.sigma_epsilon_uev,
                n_points: n.n_points,
                spacing: n.spacing_uev,
            }),
            ablation: self.ablation,
        };
        config.validate()?;
        Ok(config)
    }
}
