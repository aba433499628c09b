//! JSON sidecars and run summaries.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::EmulationConfig;
use crate::error::Result;
use crate::heom::HeomProblem;

/// SHA-256 of the compact JSON serialisation, hex encoded.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

/// Parameters and hierarchy bookkeeping written next to a trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub run: String,
    pub config: EmulationConfig,
    pub config_hash: String,
    pub dimension: usize,
    pub depth: usize,
    pub n_terms: usize,
    pub hierarchy_size: usize,
    pub terminator_strength: f64,
}

impl RunMetadata {
    pub fn new(run: &str, config: &EmulationConfig, problem: &HeomProblem) -> Result<Self> {
        Ok(Self {
            run: run.to_string(),
            config: *config,
            config_hash: config_hash(config)?,
            dimension: problem.dim(),
            depth: problem.depth,
            n_terms: problem.decomposition.len(),
            hierarchy_size: problem.hierarchy_size()?,
            terminator_strength: problem.decomposition.delta_strength,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub min_fidelity: Option<f64>,
    pub max_leakage: Option<f64>,
    pub runtime_s: f64,
    pub hierarchy_size: usize,
}

impl RunSummary {
    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}
