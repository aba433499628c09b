//! Sampled reduced dynamics and its CSV form.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonians::SUBSPACE;
use crate::linalg::{eigenvalues_hermitian, hermiticity_defect, trace, CMatrix};

/// Reduced density matrices sampled on a uniform grid.
///
/// `subspace = [g, e]` names the two basis states that carry the qubit;
/// ⟨σ_z⟩ is `ρ_ee − ρ_gg` and leakage is `1 − ρ_gg − ρ_ee`, unclamped, so
/// a slightly negative value flags a truncation artefact.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub times_ns: Vec<f64>,
    pub times_target_ps: Vec<f64>,
    pub gamma_ratio: f64,
    pub basis: Vec<String>,
    pub subspace: Option<[usize; 2]>,
    pub states: Vec<CMatrix>,
}

impl Trace {
    pub fn new(
        times_ns: Vec<f64>,
        gamma_ratio: f64,
        basis: Vec<String>,
        subspace: Option<[usize; 2]>,
        states: Vec<CMatrix>,
    ) -> Self {
        let times_target_ps = times_ns.iter().map(|t| t * 1e3 / gamma_ratio).collect();
        Self {
            times_ns,
            times_target_ps,
            gamma_ratio,
            basis,
            subspace,
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.times_ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_ns.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn population(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|r| r[(k, k)].re).collect()
    }

    pub fn coherence(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.states.iter().map(|r| r[(i, j)]).collect()
    }

    pub fn sigma_z(&self) -> Option<Vec<f64>> {
        let [g, e] = self.subspace?;
        Some(self.states.iter().map(|r| r[(e, e)].re - r[(g, g)].re).collect())
    }

    pub fn leakage(&self) -> Option<Vec<f64>> {
        let [g, e] = self.subspace?;
        Some(self.states.iter().map(|r| 1.0 - r[(g, g)].re - r[(e, e)].re).collect())
    }

    /// The 2×2 block `PρP` restricted to the subspace, in `[g, e]` order.
    pub fn subspace_block(&self, sample: usize) -> Option<CMatrix> {
        let [g, e] = self.subspace?;
        let r = &self.states[sample];
        let idx = [g, e];
        Some(CMatrix::from_fn(2, 2, |a, b| r[(idx[a], idx[b])]))
    }

    pub fn max_trace_error(&self) -> f64 {
        self.states.iter().map(|r| (trace(r) - 1.0).norm()).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.states.iter().map(hermiticity_defect).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.states
            .iter()
            .map(|r| eigenvalues_hermitian(r)[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Sup-norm distance between two traces on the same grid, over all
    /// density-matrix elements.
    pub fn max_deviation(&self, other: &Trace) -> Result<f64> {
        if self.len() != other.len() || self.dim() != other.dim() {
            return Err(Error::Parse("traces have different shapes".into()));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (a - b).iter().fold(0.0_f64, |m, z| m.max(z.norm())))
            .fold(0.0, f64::max))
    }

    fn header(&self) -> Vec<String> {
        let n = self.dim();
        let mut cols = vec!["time_ns".to_string(), "time_target_ps".to_string()];
        cols.extend(self.basis.iter().map(|b| format!("p_{b}")));
        if self.subspace.is_some() {
            cols.push("sigma_z".into());
            cols.push("leakage".into());
        }
        for i in 0..n {
            for j in 0..n {
                cols.push(format!("rho_{i}_{j}_re"));
                cols.push(format!("rho_{i}_{j}_im"));
            }
        }
        cols
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", self.header().join(","))?;
        let sz = self.sigma_z();
        let lk = self.leakage();
        let n = self.dim();
        for (s, r) in self.states.iter().enumerate() {
            let mut row = vec![self.times_ns[s], self.times_target_ps[s]];
            row.extend((0..n).map(|k| r[(k, k)].re));
            if let (Some(z), Some(l)) = (&sz, &lk) {
                row.push(z[s]);
                row.push(l[s]);
            }
            for i in 0..n {
                for j in 0..n {
                    row.push(r[(i, j)].re);
                    row.push(r[(i, j)].im);
                }
            }
            let text: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", text.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a trace written by [`Trace::write_csv`]. The subspace is
    /// inferred from the dimension: the whole space for 2 levels, `[T−, S0]`
    /// for the 5-level double dot.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty trace file".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols[0] != "time_ns" || cols[1] != "time_target_ps" {
            return Err(Error::Parse(
                "trace header must start with time_ns,time_target_ps".into(),
            ));
        }
        let basis: Vec<String> = cols
            .iter()
            .filter_map(|c| c.strip_prefix("p_").map(str::to_string))
            .collect();
        let n = basis.len();
        let find = |name: &str| cols.iter().position(|c| *c == name);
        let mut rho_cols = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let re = find(&format!("rho_{i}_{j}_re"));
                let im = find(&format!("rho_{i}_{j}_im"));
                match (re, im) {
                    (Some(a), Some(b)) => rho_cols.push((a, b)),
                    _ => return Err(Error::Parse(format!("missing column rho_{i}_{j}"))),
                }
            }
        }
        let subspace = if find("sigma_z").is_some() {
            match n {
                2 => Some([0, 1]),
                5 => Some(SUBSPACE),
                _ => None,
            }
        } else {
            None
        };
        let (mut times_ns, mut times_ps, mut states) = (Vec::new(), Vec::new(), Vec::new());
        for (ln, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
            if vals.len() != cols.len() {
                return Err(Error::Parse(format!("line {}: expected {} fields", ln + 2, cols.len())));
            }
            times_ns.push(vals[0]);
            times_ps.push(vals[1]);
            states.push(CMatrix::from_fn(n, n, |i, j| {
                let (a, b) = rho_cols[i * n + j];
                Complex64::new(vals[a], vals[b])
            }));
        }
        let gamma_ratio = times_ns
            .iter()
            .zip(&times_ps)
            .find(|(t, _)| **t > 0.0)
            .map(|(t, p)| t * 1e3 / p)
            .unwrap_or(1.0);
        Ok(Self {
            times_ns,
            times_target_ps: times_ps,
            gamma_ratio,
            basis,
            subspace,
            states,
        })
    }
}
