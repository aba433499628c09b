//! (k_s, t_c) heat maps of the minimum fidelity.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compare, noise_average_with_target, run_simulator, run_target, Ablation, EmulationConfig, NoiseGrid};
use crate::error::{invalid, Result};
use crate::heom::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariant {
    Pristine,
    DropQdLeakCouplings,
    DropQbsLeakCouplings,
    /// Pristine Hamiltonian averaged over detuning noise (the configuration's
    /// noise grid, or σ_ε = 2 μeV on 10 points if it has none).
    Noisy,
}

impl SweepVariant {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariant::Pristine => "pristine",
            SweepVariant::DropQdLeakCouplings => "drop_qd_leak",
            SweepVariant::DropQbsLeakCouplings => "drop_qbs_leak",
            SweepVariant::Noisy => "noisy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SweepVariant::Pristine,
            SweepVariant::DropQdLeakCouplings,
            SweepVariant::DropQbsLeakCouplings,
            SweepVariant::Noisy,
        ]
        .into_iter()
        .find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub sensitivity: f64,
    pub tunnel_coupling: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variant: SweepVariant,
    pub sensitivities: Vec<f64>,
    pub tunnel_couplings: Vec<f64>,
    /// `min_fidelity[i][j]` at `tunnel_couplings[i]`, `sensitivities[j]`;
    /// `None` for failed cells.
    pub min_fidelity: Vec<Vec<Option<f64>>>,
    pub max_leakage: Vec<Vec<Option<f64>>>,
    pub failures: Vec<CellFailure>,
}

impl SweepResult {
    fn write_matrix(&self, path: &Path, values: &[Vec<Option<f64>>]) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let head: Vec<String> = self.sensitivities.iter().map(|k| k.to_string()).collect();
        writeln!(w, "t_c_uev\\k_s,{}", head.join(","))?;
        for (tc, row) in self.tunnel_couplings.iter().zip(values) {
            let cells: Vec<String> = row
                .iter()
                .map(|v| v.map_or_else(|| "NaN".to_string(), |x| x.to_string()))
                .collect();
            writeln!(w, "{tc},{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Heat map of min F(t): header row of k_s values, one row per t_c.
    pub fn write_fidelity_csv(&self, path: &Path) -> Result<()> {
        self.write_matrix(path, &self.min_fidelity)
    }

    pub fn write_leakage_csv(&self, path: &Path) -> Result<()> {
        self.write_matrix(path, &self.max_leakage)
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn sweep(
    base: &EmulationConfig,
    sensitivities: &[f64],
    tunnel_couplings: &[f64],
    variant: SweepVariant,
) -> Result<SweepResult> {
    let target = run_target(base)?;
    sweep_with_target(base, &target, sensitivities, tunnel_couplings, variant)
}

/// Runs every cell independently; a failing cell is recorded and the rest
/// of the map is still computed.
pub fn sweep_with_target(
    base: &EmulationConfig,
    target: &Trace,
    sensitivities: &[f64],
    tunnel_couplings: &[f64],
    variant: SweepVariant,
) -> Result<SweepResult> {
    if sensitivities.is_empty() || tunnel_couplings.is_empty() {
        return Err(invalid("grid", "sweep grid is empty"));
    }
    let cells: Vec<(usize, usize)> = (0..tunnel_couplings.len())
        .flat_map(|i| (0..sensitivities.len()).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<Result<(f64, f64)>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut cfg = base.at_operating_point(sensitivities[j], tunnel_couplings[i]);
            cfg.ablation = match variant {
                SweepVariant::DropQdLeakCouplings => Ablation::DropQdLeakCouplings,
                SweepVariant::DropQbsLeakCouplings => Ablation::DropQbsLeakCouplings,
                _ => Ablation::None,
            };
            let cmp = if variant == SweepVariant::Noisy {
                cfg.noise = Some(cfg.noise.unwrap_or_else(NoiseGrid::reference));
                noise_average_with_target(&cfg, target.clone())?.comparison
            } else {
                compare(target, &run_simulator(&cfg)?)?
            };
            Ok((cmp.min_fidelity, cmp.max_leakage))
        })
        .collect();
    let mut result = SweepResult {
        variant,
        sensitivities: sensitivities.to_vec(),
        tunnel_couplings: tunnel_couplings.to_vec(),
        min_fidelity: vec![vec![None; sensitivities.len()]; tunnel_couplings.len()],
        max_leakage: vec![vec![None; sensitivities.len()]; tunnel_couplings.len()],
        failures: Vec::new(),
    };
    for (&(i, j), outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Ok((f, l)) => {
                result.min_fidelity[i][j] = Some(f);
                result.max_leakage[i][j] = Some(l);
            }
            Err(e) => result.failures.push(CellFailure {
                sensitivity: sensitivities[j],
                tunnel_coupling: tunnel_couplings[i],
                error: e.to_string(),
            }),
        }
    }
    Ok(result)
}
