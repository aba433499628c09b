//! Target-vs-simulator emulation drivers: configuration, the two HEOM runs,
//! fidelity and leakage metrics, static-noise averaging and sweeps.

mod noise;
mod output;
mod sweep;

use serde::{Deserialize, Serialize};

pub use noise::{
    average_traces, noise_average, noise_average_with_target, noise_grid, NoiseAverage, NoiseGrid, NoisePoint,
};
pub use output::{config_hash, RunMetadata, RunSummary};
pub use sweep::{linspace, sweep, sweep_with_target, CellFailure, SweepResult, SweepVariant};

use crate::bath::{pade_decompose, BathCorrelation, ExponentialBathDecomposition, SpectralDensity};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::hamiltonians::{
    build_dqd, choose_delta_q, mixing_angle, CouplingKind, DqdMatrices, DqdParameters, TwoLevelSystem, DQD_BASIS,
    EXCITED, GROUND, S0, S1, SUBSPACE, TWO_LEVEL_BASIS, T_MINUS, T_PLUS,
};
use crate::heom::{propagate_with, HeomProblem, PropagationOptions, Trace};
use crate::linalg::{hermitian_function, hermiticity_defect, max_abs, projector, psd_sqrt, trace, CMatrix, ZERO};
use crate::mapping::{control_fields, ControlFields, MappingSpec};

/// Target two-level system and its Drude–Lorentz bath, energies in μeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub system: TwoLevelSystem,
    /// λ (μeV)
    pub reorganization: f64,
    /// ħω_c (μeV)
    pub cutoff: f64,
    /// T (K)
    pub temperature: f64,
}

impl TargetSpec {
    pub fn spectral_density(&self) -> Result<SpectralDensity> {
        SpectralDensity::drude_lorentz(self.reorganization, self.cutoff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeomSettings {
    pub depth: usize,
    pub n_pade: usize,
    /// Propagation length in target-frame picoseconds.
    pub t_final_ps: f64,
    /// Sampling intervals per run.
    pub samples: usize,
    /// Target-frame time step in ps; `None` picks a step per run from the
    /// hierarchy-coupling bound and the simulator level spacing.
    pub dt_ps: Option<f64>,
    pub terminator: bool,
}

impl Default for HeomSettings {
    fn default() -> Self {
        Self {
            depth: 10,
            n_pade: 6,
            t_final_ps: 1.5,
            samples: 500,
            dt_ps: None,
            terminator: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    None,
    /// Zero the gradient-field elements linking the subspace to T+ and S1
    /// (and T+ to S1) in the QD Hamiltonian.
    DropQdLeakCouplings,
    /// Zero the S0–S1 element of the QD–QBS coupling matrix.
    DropQbsLeakCouplings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmulationConfig {
    pub target: TargetSpec,
    pub map: MappingSpec,
    /// α (eV/V)
    pub lever_arm: f64,
    pub heom: HeomSettings,
    pub noise: Option<NoiseGrid>,
    pub ablation: Ablation,
}

impl EmulationConfig {
    /// Relaxation of a displaced-oscillator molecule (Δ = 10 meV, η = 5 meV,
    /// λ = 5 meV, ħω_c = 10 meV, 300 K) emulated at 60 mK with
    /// t_c = 100 μeV and k_s = 0.6.
    pub fn reference() -> Self {
        Self {
            target: TargetSpec {
                system: TwoLevelSystem {
                    delta: 10_000.0,
                    eta: 5_000.0,
                    coupling_kind: CouplingKind::DisplacedOscillator,
                },
                reorganization: 5_000.0,
                cutoff: 10_000.0,
                temperature: 300.0,
            },
            map: MappingSpec {
                target_temperature: 300.0,
                simulator_temperature: 0.06,
                gamma_ratio: 300.0 / 0.06,
                sensitivity: 0.6,
                tunnel_coupling: 100.0,
                g_factor: 2.0,
                sigma_epsilon: 0.0,
            },
            lever_arm: 0.1,
            heom: HeomSettings::default(),
            noise: None,
            ablation: Ablation::None,
        }
    }

    /// Same configuration at another (k_s, t_c) operating point.
    pub fn at_operating_point(&self, sensitivity: f64, tunnel_coupling: f64) -> Self {
        let mut c = *self;
        c.map.sensitivity = sensitivity;
        c.map.tunnel_coupling = tunnel_coupling;
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        ensure_positive("lever_arm", self.lever_arm)?;
        ensure_positive("reorganization", self.target.reorganization)?;
        ensure_positive("cutoff", self.target.cutoff)?;
        ensure_positive("temperature", self.target.temperature)?;
        if (self.target.temperature - self.map.target_temperature).abs() > 1e-12 * self.target.temperature {
            return Err(invalid("temperature", "target and mapping temperatures differ"));
        }
        ensure_positive("t_final_ps", self.heom.t_final_ps)?;
        if self.heom.depth == 0 {
            return Err(invalid("depth", "must be at least 1"));
        }
        if self.heom.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if let Some(dt) = self.heom.dt_ps {
            ensure_positive("dt_ps", dt)?;
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.map.gamma_ratio
    }

    pub fn control_fields(&self) -> Result<ControlFields> {
        control_fields(&self.map, self.target.system.delta, self.target.system.eta)
    }

    /// QD parameters at the nominal operating point, with the bias charge
    /// chosen for the target coupling kind.
    pub fn dqd_parameters(&self) -> Result<DqdParameters> {
        let f = self.control_fields()?;
        let theta = mixing_angle(f.detuning, self.map.tunnel_coupling)?;
        let cd = choose_delta_q(self.target.system.coupling_kind, self.lever_arm, theta);
        Ok(DqdParameters {
            detuning: f.detuning,
            tunnel_coupling: self.map.tunnel_coupling,
            b_avg: f.b_avg,
            delta_b: f.delta_b,
            g_factor: self.map.g_factor,
            lever_arm: self.lever_arm,
            delta_q: cd.delta_q,
        })
    }

    /// κ at the nominal operating point (eV/V).
    pub fn kappa(&self) -> Result<f64> {
        let f = self.control_fields()?;
        let theta = mixing_angle(f.detuning, self.map.tunnel_coupling)?;
        Ok(choose_delta_q(self.target.system.coupling_kind, self.lever_arm, theta).kappa)
    }

    fn decomposition(&self, sd: SpectralDensity, temperature: f64) -> Result<ExponentialBathDecomposition> {
        let d = pade_decompose(&BathCorrelation::new(sd, temperature)?, self.heom.n_pade)?;
        Ok(if self.heom.terminator {
            d
        } else {
            d.without_terminator()
        })
    }

    pub fn target_problem(&self) -> Result<HeomProblem> {
        self.validate()?;
        let sys = &self.target.system;
        let d = self.decomposition(self.target.spectral_density()?, self.target.temperature)?;
        HeomProblem::new(
            sys.hamiltonian(),
            sys.coupling_operator(),
            d,
            self.heom.depth,
            projector(2, EXCITED),
        )
    }

    /// Five-level problem with the detuning shifted by `detuning_offset`
    /// (μeV). Fields, ΔQ and κ stay at their nominal values.
    pub fn simulator_problem(&self, detuning_offset: f64) -> Result<HeomProblem> {
        self.validate()?;
        let mut params = self.dqd_parameters()?;
        params.detuning += detuning_offset;
        let kappa = self.kappa()?;
        let mut m = build_dqd(&params)?;
        apply_ablation(&mut m, self.ablation);
        let gamma = self.gamma();
        let sd = SpectralDensity::drude_lorentz(self.target.reorganization / gamma, self.target.cutoff / gamma)?;
        let d = self.decomposition(sd, self.map.simulator_temperature)?;
        let s = m.coupling_matrix.unscale(kappa);
        HeomProblem::new(m.h_qd, s, d, self.heom.depth, projector(5, S0))
    }

    fn options(&self, gamma_ratio: f64, simulator: bool) -> PropagationOptions {
        let (basis, subspace): (Vec<String>, [usize; 2]) = if simulator {
            (DQD_BASIS.iter().map(|s| s.to_string()).collect(), SUBSPACE)
        } else {
            (
                TWO_LEVEL_BASIS.iter().map(|s| s.to_string()).collect(),
                [GROUND, EXCITED],
            )
        };
        PropagationOptions {
            samples: self.heom.samples,
            gamma_ratio,
            basis,
            subspace: Some(subspace),
            ..Default::default()
        }
    }

    /// Step (ns, run frame) for a problem whose time runs `scale` times
    /// slower than the target frame.
    fn step_ns(&self, problem: &HeomProblem, scale: f64) -> f64 {
        match self.heom.dt_ps {
            Some(dt) => dt * 1e-3 * scale,
            None => auto_step(problem),
        }
    }
}

/// Default step: half the hierarchy-coupling bound, and at most 1.5 rad of
/// phase per step at the widest level spacing.
pub fn auto_step(problem: &HeomProblem) -> f64 {
    let ev = crate::linalg::eigenvalues_hermitian(&problem.h_sys);
    let spread = ev[ev.len() - 1] - ev[0];
    let phase_limit = if spread > 0.0 {
        crate::units::reduced_to_ns(AUTO_PHASE_PER_STEP / spread)
    } else {
        f64::INFINITY
    };
    (0.5 * problem.max_stable_dt()).min(phase_limit)
}

const AUTO_PHASE_PER_STEP: f64 = 1.5;

fn apply_ablation(m: &mut DqdMatrices, ablation: Ablation) {
    let zero_pair = |mat: &mut CMatrix, i: usize, j: usize| {
        mat[(i, j)] = ZERO;
        mat[(j, i)] = ZERO;
    };
    match ablation {
        Ablation::None => {}
        Ablation::DropQdLeakCouplings => {
            zero_pair(&mut m.h_qd, T_PLUS, S0);
            zero_pair(&mut m.h_qd, T_PLUS, S1);
            zero_pair(&mut m.h_qd, T_MINUS, S1);
        }
        Ablation::DropQbsLeakCouplings => zero_pair(&mut m.coupling_matrix, S0, S1),
    }
}

/// Target relaxation from |e⟩; times in both frames coincide.
pub fn run_target(config: &EmulationConfig) -> Result<Trace> {
    let p = config.target_problem()?;
    let dt = config.step_ns(&p, 1.0);
    let opts = config.options(1.0, false);
    propagate_with(&p, config.heom.t_final_ps * 1e-3, dt, &opts).map(|(t, _)| t)
}

/// Five-level simulator from |S0⟩, run for γ times the target duration.
pub fn run_simulator(config: &EmulationConfig) -> Result<Trace> {
    run_simulator_at(config, 0.0)
}

pub(crate) fn run_simulator_at(config: &EmulationConfig, detuning_offset: f64) -> Result<Trace> {
    let p = config.simulator_problem(detuning_offset)?;
    let gamma = config.gamma();
    let dt = config.step_ns(&p, gamma);
    let opts = config.options(gamma, true);
    propagate_with(&p, gamma * config.heom.t_final_ps * 1e-3, dt, &opts).map(|(t, _)| t)
}

/// Uhlmann fidelity `(Tr√(√a b √a))²` after clipping negative eigenvalues
/// and normalising both matrices to unit trace.
pub fn fidelity(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(invalid("rho", "fidelity needs two square matrices of equal size"));
    }
    let prep = |m: &CMatrix, name: &'static str| -> Result<CMatrix> {
        if hermiticity_defect(m) > 1e-9 * max_abs(m).max(1.0) {
            return Err(invalid(name, "must be Hermitian"));
        }
        let clipped = hermitian_function(m, |v| if v < 0.0 { 0.0 } else { v });
        let tr = trace(&clipped).re;
        if !(tr > 0.0) {
            return Err(invalid(name, "has no weight to normalise"));
        }
        Ok(clipped.unscale(tr))
    };
    let a = prep(a, "rho_a")?;
    let b = prep(b, "rho_b")?;
    let ra = psd_sqrt(&a);
    let inner = &ra * b * &ra;
    let root_trace = crate::linalg::eigenvalues_hermitian(&inner)
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .sum::<f64>();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub times_target_ps: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub min_fidelity: f64,
    pub sigma_z_target: Vec<f64>,
    pub sigma_z_sim: Vec<f64>,
    pub leakage: Vec<f64>,
    pub max_leakage: f64,
    /// Trace of the simulator's subspace block at each sample, the factor
    /// removed before computing the fidelity.
    pub subspace_weight: Vec<f64>,
}

/// Compares a target trace with a simulator trace sampled on the same
/// target-frame grid.
pub fn compare(target: &Trace, sim: &Trace) -> Result<ComparisonResult> {
    if target.len() != sim.len() {
        return Err(invalid(
            "trace",
            format!("lengths differ: {} vs {}", target.len(), sim.len()),
        ));
    }
    for (a, b) in target.times_target_ps.iter().zip(&sim.times_target_ps) {
        if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1e-12) {
            return Err(invalid("trace", format!("time grids differ ({a} ps vs {b} ps)")));
        }
    }
    let need = |t: &Trace| {
        t.sigma_z()
            .zip(t.leakage())
            .ok_or_else(|| invalid("trace", "no subspace recorded"))
    };
    let (sz_t, _) = need(target)?;
    let (sz_s, leak) = need(sim)?;
    let mut fid = Vec::with_capacity(target.len());
    let mut weight = Vec::with_capacity(target.len());
    for s in 0..target.len() {
        let a = target
            .subspace_block(s)
            .ok_or_else(|| Error::Parse("target subspace".into()))?;
        let b = sim
            .subspace_block(s)
            .ok_or_else(|| Error::Parse("simulator subspace".into()))?;
        weight.push(trace(&b).re);
        fid.push(fidelity(&a, &b)?);
    }
    Ok(ComparisonResult {
        times_target_ps: target.times_target_ps.clone(),
        min_fidelity: fid.iter().copied().fold(f64::INFINITY, f64::min),
        fidelity: fid,
        sigma_z_target: sz_t,
        sigma_z_sim: sz_s,
        max_leakage: leak.iter().copied().fold(0.0, f64::max),
        leakage: leak,
        subspace_weight: weight,
    })
}
