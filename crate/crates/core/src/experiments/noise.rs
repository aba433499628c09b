//! Quasi-static detuning noise: Gaussian quadrature over a uniform grid of
//! detuning offsets and averaging of the simulator density matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{compare, run_simulator_at, run_target, ComparisonResult, EmulationConfig};
use crate::error::{ensure_finite, ensure_positive, invalid, Result};
use crate::heom::Trace;
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseGrid {
    /// σ_ε (μeV)
    pub sigma_epsilon: f64,
    pub n_points: usize,
    /// Distance between neighbouring offsets (μeV).
    pub spacing: f64,
}

impl NoiseGrid {
    /// σ_ε = 2 μeV sampled at 10 points 0.5 μeV apart.
    pub fn reference() -> Self {
        Self {
            sigma_epsilon: 2.0,
            n_points: 10,
            spacing: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("sigma_epsilon", self.sigma_epsilon)?;
        if self.sigma_epsilon < 0.0 {
            return Err(invalid("sigma_epsilon", "must be ≥ 0"));
        }
        if self.n_points == 0 {
            return Err(invalid("n_points", "must be at least 1"));
        }
        ensure_positive("spacing", self.spacing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    /// δε_d (μeV)
    pub offset: f64,
    pub weight: f64,
}

/// Offsets placed symmetrically about zero (±spacing/2, ±3·spacing/2, … for
/// an even count), each weighted by the Gaussian mass of its bin
/// `[offset ± spacing/2]`; the tails go to the outermost bins. σ_ε = 0
/// collapses to a single unperturbed point.
pub fn noise_grid(grid: &NoiseGrid) -> Result<Vec<NoisePoint>> {
    grid.validate()?;
    if grid.sigma_epsilon == 0.0 {
        return Ok(vec![NoisePoint {
            offset: 0.0,
            weight: 1.0,
        }]);
    }
    let normal = Normal::new(0.0, grid.sigma_epsilon).map_err(|e| invalid("sigma_epsilon", e.to_string()))?;
    let n = grid.n_points;
    let centre = 0.5 * (n as f64 - 1.0);
    let offsets: Vec<f64> = (0..n).map(|i| (i as f64 - centre) * grid.spacing).collect();
    let edge_cdf = |x: f64| normal.cdf(x);
    let mut points: Vec<NoisePoint> = offsets
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = if i == 0 { 0.0 } else { edge_cdf(x - 0.5 * grid.spacing) };
            let hi = if i + 1 == n {
                1.0
            } else {
                edge_cdf(x + 0.5 * grid.spacing)
            };
            NoisePoint {
                offset: x,
                weight: hi - lo,
            }
        })
        .collect();
    let total: f64 = points.iter().map(|p| p.weight).sum();
    for p in &mut points {
        p.weight /= total;
    }
    let check: f64 = points.iter().map(|p| p.weight).sum();
    if (check - 1.0).abs() > 1e-12 {
        return Err(invalid("noise", format!("weights sum to {check}")));
    }
    Ok(points)
}

#[derive(Debug, Clone)]
pub struct NoiseAverage {
    pub points: Vec<NoisePoint>,
    pub target: Trace,
    /// Σ w_n ρ_n(t) over the simulator runs.
    pub averaged: Trace,
    pub comparison: ComparisonResult,
}

/// Weighted average Σ w_n ρ_n of traces sampled on the same grid.
pub fn average_traces(traces: &[Trace], weights: &[f64]) -> Result<Trace> {
    let first = traces.first().ok_or_else(|| invalid("traces", "nothing to average"))?;
    if traces.len() != weights.len() {
        return Err(invalid("weights", "one weight per trace"));
    }
    if traces.iter().any(|t| t.len() != first.len() || t.dim() != first.dim()) {
        return Err(invalid("traces", "traces must share grid and dimension"));
    }
    let n = first.dim();
    let states = (0..first.len())
        .map(|s| {
            traces
                .iter()
                .zip(weights)
                .fold(CMatrix::zeros(n, n), |acc, (t, &w)| acc + t.states[s].scale(w))
        })
        .collect();
    Ok(Trace {
        states,
        ..first.clone()
    })
}

/// Runs the target once and the simulator at every noise offset, then
/// compares the target with the weighted simulator average.
pub fn noise_average(config: &EmulationConfig) -> Result<NoiseAverage> {
    let target = run_target(config)?;
    noise_average_with_target(config, target)
}

/// [`noise_average`] against an already computed target trace.
pub fn noise_average_with_target(config: &EmulationConfig, target: Trace) -> Result<NoiseAverage> {
    let grid = config
        .noise
        .ok_or_else(|| invalid("noise", "configuration has no noise section"))?;
    let points = noise_grid(&grid)?;
    let runs: Vec<Trace> = points
        .par_iter()
        .map(|p| run_simulator_at(config, p.offset))
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = points.iter().map(|p| p.weight).collect();
    let averaged = average_traces(&runs, &weights)?;
    let comparison = compare(&target, &averaged)?;
    Ok(NoiseAverage {
        points,
        target,
        averaged,
        comparison,
    })
}
