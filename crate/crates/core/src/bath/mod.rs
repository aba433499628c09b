//! Harmonic baths: spectral densities, two-time correlation functions and
//! their exponential decompositions.
//!
//! The correlation function of a bath with spectral density `J` at inverse
//! temperature β is
//!
//! ```text
//! C(t) = ∫₀^∞ dω J(ω) [coth(βω/2) cos ωt − i sin ωt]
//! ```
//!
//! in μeV² with t in ħ/μeV. [`correlation_quadrature`] evaluates it
//! directly and is the oracle for [`pade_decompose`].

mod pade;

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::integrate::{self, Oscillation, Rule, Tolerance};
use crate::qbs::QbsDesign;
use crate::units::{ns_to_reduced, HBAR_OVER_E2, K_B};

pub use pade::{pade_decompose, pade_poles, ExpTerm, ExponentialBathDecomposition, PadePoles};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralDensity {
    /// `(2λ/π)·ω_c ω/(ω² + ω_c²)`, energies in μeV.
    DrudeLorentz { lambda: f64, omega_c: f64 },
    /// Linear interpolation on a strictly increasing grid, zero outside.
    Tabulated { omega: Vec<f64>, j: Vec<f64> },
    /// `κ²ω·Re Z(ω/γ)/(π ħ/e²)` of an RLC array, with κ in eV/V.
    RlcSynthesized {
        design: QbsDesign,
        kappa: f64,
        gamma_ratio: f64,
    },
    /// `S(ω, ω*)·J(ω)`
    LowPass {
        base: Box<SpectralDensity>,
        omega_star: f64,
    },
    /// `(1 − S(ω, ω*))·J(ω)`
    HighPass {
        base: Box<SpectralDensity>,
        omega_star: f64,
    },
}

/// `[1 − (ω/ω*)²]²` below ω*, zero above.
pub fn splitting_function(omega: f64, omega_star: f64) -> f64 {
    if omega >= omega_star {
        0.0
    } else {
        let x = omega / omega_star;
        let b = 1.0 - x * x;
        b * b
    }
}

impl SpectralDensity {
    pub fn drude_lorentz(lambda: f64, omega_c: f64) -> Result<Self> {
        ensure_positive("omega_c", omega_c)?;
        ensure_finite("lambda", lambda)?;
        if lambda < 0.0 {
            return Err(invalid("lambda", "reorganization energy must be ≥ 0"));
        }
        Ok(Self::DrudeLorentz { lambda, omega_c })
    }

    pub fn tabulated(omega: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if omega.len() != j.len() {
            return Err(invalid("tabulated", "ω and J columns differ in length"));
        }
        if omega.len() < 2 {
            return Err(invalid("tabulated", "need at least two grid points"));
        }
        if omega.iter().chain(&j).any(|v| !v.is_finite()) {
            return Err(invalid("tabulated", "non-finite entry"));
        }
        if omega[0] < 0.0 || omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tabulated", "ω grid must be ≥ 0 and strictly increasing"));
        }
        if j.iter().any(|&v| v < 0.0) {
            return Err(invalid("tabulated", "J must be ≥ 0"));
        }
        Ok(Self::Tabulated { omega, j })
    }

    pub fn rlc_synthesized(design: QbsDesign, kappa: f64, gamma_ratio: f64) -> Result<Self> {
        ensure_positive("kappa", kappa)?;
        ensure_positive("gamma_ratio", gamma_ratio)?;
        Ok(Self::RlcSynthesized {
            design,
            kappa,
            gamma_ratio,
        })
    }

    /// J(ω) in μeV; rejects negative ω.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(invalid("omega", format!("must be finite and ≥ 0, got {omega}")));
        }
        Ok(self.value(omega))
    }

    /// J(ω) without argument checks; ω must be ≥ 0.
    pub fn value(&self, omega: f64) -> f64 {
        match self {
            Self::DrudeLorentz { lambda, omega_c } => {
                2.0 * lambda / std::f64::consts::PI * omega_c * omega / (omega * omega + omega_c * omega_c)
            }
            Self::Tabulated { omega: w, j } => interpolate(w, j, omega),
            Self::RlcSynthesized {
                design,
                kappa,
                gamma_ratio,
            } => {
                kappa * kappa * omega * design.impedance_real(omega / gamma_ratio)
                    / (std::f64::consts::PI * HBAR_OVER_E2)
            }
            Self::LowPass { base, omega_star } => splitting_function(omega, *omega_star) * base.value(omega),
            Self::HighPass { base, omega_star } => (1.0 - splitting_function(omega, *omega_star)) * base.value(omega),
        }
    }

    /// Upper end of the support, if bounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            Self::Tabulated { omega, .. } => omega.last().copied(),
            Self::LowPass { base, omega_star } => Some(match base.support_end() {
                Some(e) => e.min(*omega_star),
                None => *omega_star,
            }),
            Self::HighPass { base, .. } => base.support_end(),
            _ => None,
        }
    }

    /// Points where J has kinks or sharp features, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = match self {
            Self::DrudeLorentz { omega_c, .. } => vec![*omega_c],
            Self::Tabulated { omega, .. } => omega.clone(),
            Self::RlcSynthesized {
                design, gamma_ratio, ..
            } => design
                .effective_resonances()
                .into_iter()
                .map(|w| w * gamma_ratio)
                .collect(),
            Self::LowPass { base, omega_star } | Self::HighPass { base, omega_star } => {
                let mut b = base.breakpoints();
                b.push(*omega_star);
                b
            }
        };
        v.retain(|x| x.is_finite() && *x > 0.0);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// A frequency beyond which J has no structure left.
    pub fn scale(&self) -> f64 {
        let b = self.breakpoints();
        let top = b.last().copied().unwrap_or(1.0);
        match self {
            Self::RlcSynthesized {
                design, gamma_ratio, ..
            } => top + 20.0 * design.max_damping() * gamma_ratio,
            _ => top,
        }
    }

    /// Power p of the high-frequency tail J ~ ω^p for unbounded support.
    pub fn tail_exponent(&self) -> Option<f64> {
        match self {
            Self::DrudeLorentz { lambda, .. } if *lambda == 0.0 => None,
            Self::DrudeLorentz { .. } | Self::RlcSynthesized { .. } => Some(-1.0),
            Self::HighPass { base, .. } => base.tail_exponent(),
            Self::Tabulated { .. } | Self::LowPass { .. } => None,
        }
    }

    /// Local exponent s of J ~ ω^s at the low-frequency end, or `None` when
    /// J vanishes identically there.
    pub fn low_frequency_exponent(&self) -> Option<f64> {
        let h = 1e-7 * self.scale();
        let (a, b) = (self.value(h), self.value(2.0 * h));
        if a <= 0.0 && b <= 0.0 {
            None
        } else if a <= 0.0 {
            Some(f64::INFINITY)
        } else {
            Some((b / a).log2())
        }
    }

    /// Samples J on a grid.
    pub fn tabulate(&self, grid: &[f64]) -> Result<SpectralDensity> {
        let j = grid.iter().map(|&w| self.evaluate(w)).collect::<Result<Vec<_>>>()?;
        SpectralDensity::tabulated(grid.to_vec(), j)
    }

    /// Reorganization energy λ = ∫₀^∞ J(ω)/ω dω.
    pub fn reorganization_energy(&self) -> Result<f64> {
        if let Self::DrudeLorentz { lambda, .. } = self {
            return Ok(*lambda);
        }
        let f = |w: f64| if w > 0.0 { self.value(w) / w } else { 0.0 };
        let mut pts = vec![0.0];
        pts.extend(self.breakpoints());
        let tol = Tolerance::default();
        match self.support_end() {
            Some(end) => {
                pts.retain(|&x| x <= end);
                pts.push(end);
                pts.dedup();
                Ok(integrate::piecewise(Rule::GaussKronrod, f, &pts, tol)?.value)
            }
            None => {
                let head = integrate::piecewise(Rule::GaussKronrod, f, &pts, tol)?.value;
                let a = *pts.last().unwrap_or(&0.0);
                Ok(head + integrate::semi_infinite(Rule::GaussKronrod, f, a, tol)?.value)
            }
        }
    }
}

fn interpolate(w: &[f64], j: &[f64], x: f64) -> f64 {
    let n = w.len();
    if n == 0 || x < w[0] || x > w[n - 1] {
        return 0.0;
    }
    let i = w.partition_point(|&v| v <= x);
    if i == 0 {
        return j[0];
    }
    if i >= n {
        return j[n - 1];
    }
    let t = (x - w[i - 1]) / (w[i] - w[i - 1]);
    j[i - 1] + t * (j[i] - j[i - 1])
}

/// J(ω)·coth(βω/2), continued to its ω → 0 limit.
fn j_coth(j: &impl Fn(f64) -> f64, omega: f64, beta: f64) -> f64 {
    if omega <= 0.0 {
        let h = 1e-12;
        return j(h) * 2.0 / (beta * h);
    }
    let x = 0.5 * beta * omega;
    if x > 20.0 {
        j(omega)
    } else {
        j(omega) / x.tanh()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathCorrelation {
    pub spectral_density: SpectralDensity,
    /// Kelvin.
    pub temperature: f64,
}

impl BathCorrelation {
    pub fn new(spectral_density: SpectralDensity, temperature: f64) -> Result<Self> {
        ensure_positive("temperature", temperature)?;
        Ok(Self {
            spectral_density,
            temperature,
        })
    }

    /// 1/(k_B T) in 1/μeV.
    pub fn beta(&self) -> f64 {
        1.0 / (K_B * self.temperature)
    }
}

/// Description of a cosine/sine transform over a spectral density.
struct Transform<'a, F: Fn(f64) -> f64> {
    j: &'a F,
    breakpoints: Vec<f64>,
    support_end: Option<f64>,
    scale: f64,
}

impl<F: Fn(f64) -> f64> Transform<'_, F> {
    /// ∫₀^∞ g(ω)·trig(ωτ) dω where g is J·coth or J.
    fn run(&self, g: impl Fn(f64) -> f64, tau: f64, kind: Oscillation, rule: Rule, tol: Tolerance) -> Result<f64> {
        let trig = |w: f64| match kind {
            Oscillation::Cos => (w * tau).cos(),
            Oscillation::Sin => (w * tau).sin(),
        };
        let f = |w: f64| g(w) * trig(w);
        let mut pts = vec![0.0];
        pts.extend(self.breakpoints.iter().copied());
        match self.support_end {
            Some(end) => {
                pts.retain(|&x| x < end);
                pts.push(end);
                add_half_periods(&mut pts, tau);
                Ok(integrate::piecewise(rule, f, &pts, tol)?.value)
            }
            None => {
                let head_end = 10.0 * self.scale;
                pts.retain(|&x| x < head_end);
                pts.push(head_end);
                add_half_periods(&mut pts, tau);
                let head = integrate::piecewise(rule, f, &pts, tol)?.value;
                let tail = if tau > 0.0 {
                    integrate::fourier_tail(rule, &g, head_end, tau, kind, tol)?.value
                } else {
                    integrate::semi_infinite(rule, &g, head_end, tol)?.value
                };
                Ok(head + tail)
            }
        }
    }
}

/// Splits long oscillatory stretches at half periods so each piece holds
/// one lobe of the trigonometric factor.
fn add_half_periods(pts: &mut Vec<f64>, tau: f64) {
    if tau <= 0.0 {
        return;
    }
    let end = *pts.last().unwrap_or(&0.0);
    let half = std::f64::consts::PI / tau;
    let count = (end / half).floor() as usize;
    if count == 0 || count > 20_000 {
        return;
    }
    pts.extend((1..=count).map(|k| k as f64 * half));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    pts.retain(|&x| x <= end);
}

/// Rejects spectral densities whose `J coth` integral diverges at ω → 0.
fn check_low_frequency(sd: &SpectralDensity) -> Result<()> {
    match sd.low_frequency_exponent() {
        Some(s) if s < 0.25 => Err(Error::Divergent(format!(
            "J(ω)/ω is not integrable at ω → 0 (local exponent {s:.3})"
        ))),
        _ => Ok(()),
    }
}

/// C(t) by direct quadrature with the default Gauss–Kronrod rule and
/// tolerances. Time in ns.
pub fn correlation_quadrature(bc: &BathCorrelation, t_ns: f64) -> Result<Complex64> {
    correlation_quadrature_with(bc, t_ns, Rule::GaussKronrod, Tolerance::default())
}

pub fn correlation_quadrature_with(bc: &BathCorrelation, t_ns: f64, rule: Rule, tol: Tolerance) -> Result<Complex64> {
    ensure_finite("t", t_ns)?;
    if t_ns < 0.0 {
        return Err(invalid("t", "correlation is evaluated for t ≥ 0"));
    }
    let sd = &bc.spectral_density;
    check_low_frequency(sd)?;
    let tau = ns_to_reduced(t_ns);
    if tau == 0.0 {
        if let Some(p) = sd.tail_exponent() {
            if p >= -1.0 {
                return Err(Error::Divergent(format!(
                    "Re C(0) = ∫J coth dω diverges for a J ~ ω^{p} tail"
                )));
            }
        }
    }
    let beta = bc.beta();
    let j = |w: f64| sd.value(w);
    let tr = Transform {
        j: &j,
        breakpoints: sd.breakpoints(),
        support_end: sd.support_end(),
        scale: sd.scale(),
    };
    let re = tr.run(|w| j_coth(tr.j, w, beta), tau, Oscillation::Cos, rule, tol)?;
    let im = if tau == 0.0 {
        0.0
    } else {
        -tr.run(|w| (tr.j)(w), tau, Oscillation::Sin, rule, tol)?
    };
    Ok(Complex64::new(re, im))
}

/// Real part of the line-shape function,
/// `Re g(t) = ∫₀^∞ J(ω) coth(βω/2) (1 − cos ωt)/ω² dω`, by direct
/// quadrature. For a displaced oscillator with `S = |e⟩⟨e|` and no
/// tunnelling, `|ρ_ge(t)| = |ρ_ge(0)| e^{−Re g(t)}`. Time in ns.
pub fn dephasing_exponent(bc: &BathCorrelation, t_ns: f64) -> Result<f64> {
    dephasing_exponent_with(bc, t_ns, Rule::GaussKronrod, Tolerance::new(1e-12, 1e-10))
}

pub fn dephasing_exponent_with(bc: &BathCorrelation, t_ns: f64, rule: Rule, tol: Tolerance) -> Result<f64> {
    ensure_finite("t", t_ns)?;
    let sd = &bc.spectral_density;
    check_low_frequency(sd)?;
    let tau = ns_to_reduced(t_ns.abs());
    if tau == 0.0 {
        return Ok(0.0);
    }
    let beta = bc.beta();
    let j = |w: f64| sd.value(w);
    let f = |w: f64| {
        let x = w * tau;
        // (1 − cos x)/ω² without cancellation near ω = 0
        let kernel = if x < 1e-3 {
            0.5 * tau * tau * (1.0 - x * x / 12.0)
        } else {
            2.0 * (0.5 * x).sin().powi(2) / (w * w)
        };
        j_coth(&j, w, beta) * kernel
    };
    let mut pts = vec![0.0];
    pts.extend(sd.breakpoints());
    let end = match sd.support_end() {
        Some(e) => e,
        None => 10.0 * sd.scale(),
    };
    pts.retain(|&x| x < end);
    pts.push(end);
    add_half_periods(&mut pts, tau);
    let head = integrate::piecewise(rule, f, &pts, tol)?.value;
    let tail = if sd.support_end().is_some() {
        0.0
    } else {
        let g = |w: f64| j_coth(&j, w, beta) / (w * w);
        integrate::semi_infinite(rule, g, end, tol)?.value
            - integrate::fourier_tail(rule, g, end, tau, Oscillation::Cos, tol)?.value
    };
    Ok(head + tail)
}

/// Returns `(J_L, J_H)` with `J_L = S(ω, ω*)·J` and `J_H = J − J_L`.
pub fn split_spectral_density(sd: &SpectralDensity, omega_star: f64) -> Result<(SpectralDensity, SpectralDensity)> {
    ensure_positive("omega_star", omega_star)?;
    Ok((
        SpectralDensity::LowPass {
            base: Box::new(sd.clone()),
            omega_star,
        },
        SpectralDensity::HighPass {
            base: Box::new(sd.clone()),
            omega_star,
        },
    ))
}

/// Parameters of the QD–QBS voltage coupling used to convert a target-frame
/// spectral density into a gate-voltage noise spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCoupling {
    /// α in eV/V.
    pub lever_arm: f64,
    pub sensitivity: f64,
    /// 1 for the displaced-oscillator coupling, 2 for spin-boson.
    pub n: f64,
}

impl NoiseCoupling {
    /// κ = α k_s / n in μeV/V.
    pub fn kappa_uev_per_v(&self) -> f64 {
        self.lever_arm * crate::units::UEV_PER_EV * self.sensitivity / self.n
    }
}

/// Gate-voltage autocorrelation ⟨V(t)V(0)⟩ in V² produced by the low
/// frequency part of a target spectral density, emulated as classical
/// noise at the simulator temperature:
///
/// ```text
/// (ħ/γ)(n/(α k_s))² ∫ J_L(γΩ) coth(ħΩ/2k_B T_qs) cos Ωt dΩ
/// ```
pub fn classical_noise_correlation(
    j_low: &SpectralDensity,
    temperature_qs: f64,
    gamma: f64,
    coupling: NoiseCoupling,
    t_ns: f64,
) -> Result<f64> {
    classical_noise_correlation_with(
        j_low,
        temperature_qs,
        gamma,
        coupling,
        t_ns,
        Rule::GaussKronrod,
        Tolerance::default(),
    )
}

pub fn classical_noise_correlation_with(
    j_low: &SpectralDensity,
    temperature_qs: f64,
    gamma: f64,
    coupling: NoiseCoupling,
    t_ns: f64,
    rule: Rule,
    tol: Tolerance,
) -> Result<f64> {
    ensure_positive("temperature_qs", temperature_qs)?;
    ensure_positive("gamma", gamma)?;
    ensure_positive("lever_arm", coupling.lever_arm)?;
    ensure_positive("sensitivity", coupling.sensitivity)?;
    ensure_positive("n", coupling.n)?;
    ensure_finite("t", t_ns)?;
    check_low_frequency(j_low)?;
    if let Some(p) = j_low.tail_exponent() {
        if p >= -1.0 && t_ns == 0.0 {
            return Err(Error::Divergent(
                "noise variance diverges for an unbounded J ~ 1/ω tail".into(),
            ));
        }
    }
    let beta_qs = 1.0 / (K_B * temperature_qs);
    let tau = ns_to_reduced(t_ns.abs());
    let j = |omega: f64| j_low.value(gamma * omega);
    let tr = Transform {
        j: &j,
        breakpoints: j_low.breakpoints().iter().map(|w| w / gamma).collect(),
        support_end: j_low.support_end().map(|w| w / gamma),
        scale: j_low.scale() / gamma,
    };
    let integral = tr.run(|w| j_coth(tr.j, w, beta_qs), tau, Oscillation::Cos, rule, tol)?;
    let k = coupling.kappa_uev_per_v();
    Ok(integral / (gamma * k * k))
}

/// The same quantity through the target-frame correlation function:
/// `Re C_L(t/γ) / (κγ)²` with C_L at T = γ T_qs.
pub fn classical_noise_via_correlation(
    j_low: &SpectralDensity,
    temperature_qs: f64,
    gamma: f64,
    coupling: NoiseCoupling,
    t_ns: f64,
) -> Result<f64> {
    let bc = BathCorrelation::new(j_low.clone(), gamma * temperature_qs)?;
    let c = correlation_quadrature(&bc, t_ns.abs() / gamma)?;
    let k = coupling.kappa_uev_per_v();
    Ok(c.re / (k * k * gamma * gamma))
}

/// Reads a two-column CSV (`omega_uev,j_uev` header) into a tabulated
/// spectral density.
pub fn read_spectral_density_csv(path: &Path) -> Result<SpectralDensity> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))??;
    if header.split(',').count() != 2 || header.trim().parse::<f64>().is_ok() {
        return Err(Error::Parse(format!(
            "{}: expected a two-column header line, got {header:?}",
            path.display()
        )));
    }
    let (mut omega, mut j) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad row {}: {line:?}", path.display(), n + 2)))
        };
        omega.push(parse(cols.next())?);
        j.push(parse(cols.next())?);
    }
    SpectralDensity::tabulated(omega, j)
}

pub fn write_spectral_density_csv(path: &Path, sd: &SpectralDensity, grid: &[f64]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "omega_uev,j_uev")?;
    for &w in grid {
        writeln!(out, "{w:.12e},{:.12e}", sd.evaluate(w)?)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
