//! Sum-of-exponentials decomposition of the Drude–Lorentz correlation
//! function with a [N−1/N] Padé expansion of the Bose–Einstein function.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BathCorrelation, SpectralDensity};
use crate::error::{invalid, Error, Result};
use crate::units::{ns_to_reduced, HBAR};

/// One term `c e^{−νt}` of a correlation function; `c` in μeV², `ν` in μeV
/// (a rate in ħ = 1 units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub c: Complex64,
    pub nu: Complex64,
}

impl ExpTerm {
    /// Decay rate in 1/ns.
    pub fn nu_per_ns(&self) -> Complex64 {
        self.nu / HBAR
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialBathDecomposition {
    pub terms: Vec<ExpTerm>,
    /// Strength δ (μeV) of the white-noise remainder, entering the HEOM as
    /// `−δ[S,[S,ρ]]`.
    pub delta_strength: f64,
}

impl ExponentialBathDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Σ c_k e^{−ν_k t} for t ≥ 0 in ns (the δ remainder is not included).
    pub fn evaluate(&self, t_ns: f64) -> Complex64 {
        self.evaluate_reduced(ns_to_reduced(t_ns))
    }

    pub fn evaluate_reduced(&self, tau: f64) -> Complex64 {
        self.terms.iter().map(|k| k.c * (-k.nu * tau).exp()).sum()
    }

    /// Fourier transform ∫ e^{iωt} C(t) dt of the exponential series over
    /// the whole time axis, using C(−t) = C(t)*.
    pub fn spectrum(&self, omega: f64) -> f64 {
        self.terms
            .iter()
            .map(|k| 2.0 * (k.c / (k.nu - Complex64::new(0.0, omega))).re)
            .sum()
    }

    /// Multiplies every amplitude by `factor` (a rescaled coupling enters
    /// the correlation function squared, so pass κ²).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|k| ExpTerm {
                    c: k.c * factor,
                    nu: k.nu,
                })
                .collect(),
            delta_strength: self.delta_strength * factor,
        }
    }

    pub fn without_terminator(&self) -> Self {
        Self {
            terms: self.terms.clone(),
            delta_strength: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, k) in self.terms.iter().enumerate() {
            if !(k.nu.re > 0.0) || !k.c.re.is_finite() || !k.c.im.is_finite() || !k.nu.im.is_finite() {
                return Err(invalid(
                    "decomposition",
                    format!("term {i} has c = {}, ν = {}; need finite c and Re ν > 0", k.c, k.nu),
                ));
            }
        }
        if !self.delta_strength.is_finite() {
            return Err(invalid("decomposition", "non-finite terminator strength"));
        }
        Ok(())
    }
}

/// Poles ±iξ_j and residue weights κ_j of the [N−1/N] Padé approximant
/// `1/(1 − e^{−x}) ≈ 1/x + 1/2 + Σ_j 2κ_j x/(x² + ξ_j²)` of the Bose
/// function.
#[derive(Debug, Clone, PartialEq)]
pub struct PadePoles {
    pub xi: Vec<f64>,
    pub kappa: Vec<f64>,
}

fn positive_eigenvalues(diag_off: impl Fn(usize) -> f64, dim: usize, order: usize) -> Result<Vec<f64>> {
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..dim.saturating_sub(1) {
        let v = diag_off(k);
        m[(k, k + 1)] = v;
        m[(k + 1, k)] = v;
    }
    let eig = SymmetricEigen::try_new(m, 1e-15, 10_000).ok_or(Error::PadePoles(order))?;
    let mut pos: Vec<f64> = eig.eigenvalues.iter().copied().filter(|&v| v > 0.0).collect();
    pos.sort_by(|a, b| b.total_cmp(a));
    Ok(pos)
}

/// Padé poles and residues of order `n` from the eigenvalues of two
/// symmetric tridiagonal matrices.
pub fn pade_poles(n: usize) -> Result<PadePoles> {
    if n == 0 {
        return Ok(PadePoles {
            xi: vec![],
            kappa: vec![],
        });
    }
    let big = positive_eigenvalues(|k| 1.0 / (((2 * k + 3) * (2 * k + 5)) as f64).sqrt(), 2 * n, n)?;
    if big.len() < n {
        return Err(Error::PadePoles(n));
    }
    let xi: Vec<f64> = big[..n].iter().map(|v| 2.0 / v).collect();

    let chi: Vec<f64> = if n > 1 {
        let small = positive_eigenvalues(|k| 1.0 / (((2 * k + 5) * (2 * k + 7)) as f64).sqrt(), 2 * n - 1, n)?;
        if small.len() < n - 1 {
            return Err(Error::PadePoles(n));
        }
        small[..n - 1].iter().map(|v| 2.0 / v).collect()
    } else {
        vec![]
    };

    let nf = n as f64;
    let kappa = (0..n)
        .map(|j| {
            let xj2 = xi[j] * xi[j];
            let mut p = 0.5 * nf * (2.0 * nf + 3.0);
            for k in 0..n - 1 {
                let d = if k == j { 1.0 } else { 0.0 };
                p *= (chi[k] * chi[k] - xj2) / (xi[k] * xi[k] - xj2 + d);
            }
            let d = if j == n - 1 { 1.0 } else { 0.0 };
            p / (xi[n - 1] * xi[n - 1] - xj2 + d)
        })
        .collect();
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::PadePoles(n));
    }
    Ok(PadePoles { xi, kappa })
}

/// Drude term plus `n_pade` Padé terms for a Drude–Lorentz bath, with the
/// white-noise remainder δ = 2λ/(βω_c) − Σ Re(c_k/ν_k).
pub fn pade_decompose(bc: &BathCorrelation, n_pade: usize) -> Result<ExponentialBathDecomposition> {
    let (lambda, omega_c) = match bc.spectral_density {
        SpectralDensity::DrudeLorentz { lambda, omega_c } => (lambda, omega_c),
        _ => {
            return Err(invalid(
                "spectral_density",
                "Padé decomposition is implemented for Drude–Lorentz baths",
            ))
        }
    };
    let beta = bc.beta();
    let poles = pade_poles(n_pade)?;
    let x = 0.5 * beta * omega_c;
    let mut terms = Vec::with_capacity(1 + n_pade);
    terms.push(ExpTerm {
        c: Complex64::new(lambda * omega_c / x.tan(), -lambda * omega_c),
        nu: Complex64::new(omega_c, 0.0),
    });
    for (xi, k) in poles.xi.iter().zip(&poles.kappa) {
        let nu = xi / beta;
        if (nu - omega_c).abs() <= 1e-12 * omega_c {
            return Err(invalid(
                "omega_c",
                "cutoff coincides with a Padé frequency; shift the cutoff or temperature",
            ));
        }
        let c = k / beta * 4.0 * lambda * omega_c * nu / (nu * nu - omega_c * omega_c);
        terms.push(ExpTerm {
            c: Complex64::new(c, 0.0),
            nu: Complex64::new(nu, 0.0),
        });
    }
    let captured: f64 = terms.iter().map(|t| (t.c / t.nu).re).sum();
    let full = 2.0 * lambda / (beta * omega_c);
    let mut delta_strength = full - captured;
    // the [N−1/N] approximant is exact at zero frequency, leaving only round-off
    if delta_strength.abs() <= 1e-12 * full.abs() {
        delta_strength = 0.0;
    }
    let d = ExponentialBathDecomposition { terms, delta_strength };
    d.validate()?;
    Ok(d)
}
