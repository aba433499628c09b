//! One-dimensional quadrature.
//!
//! Two independent rules are available so that every quadrature-based
//! oracle can be cross-checked: an adaptive Gauss–Kronrod (7/15) scheme and
//! a bisection-refined double-exponential rule. Semi-infinite Fourier-type
//! integrals are split at the zeros of the trigonometric factor and the
//! resulting alternating series of chunks is accelerated with Wynn's
//! ε-algorithm.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    GaussKronrod,
    DoubleExponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillation {
    Cos,
    Sin,
}

const MAX_INTERVALS: usize = 50_000;
const MAX_CHUNKS: usize = 4_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Estimate {
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Globally adaptive Gauss–Kronrod quadrature on a finite interval.
pub fn gauss_kronrod(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut intervals = vec![(a, b, kronrod15(&f, a, b))];
    loop {
        let value: f64 = intervals.iter().map(|iv| iv.2.value).sum();
        let error: f64 = intervals.iter().map(|iv| iv.2.error).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if error <= tol.target(value) {
            return Ok(Estimate { value, error });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "{} subintervals on [{a}, {b}], error {error:.3e} above target {:.3e}",
                intervals.len(),
                tol.target(value)
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval at floating-point resolution; accept what we have
            return Ok(Estimate { value, error });
        }
        intervals.push((lo, mid, kronrod15(&f, lo, mid)));
        intervals.push((mid, hi, kronrod15(&f, mid, hi)));
    }
}

/// Double-exponential quadrature, bisecting the interval until each piece
/// meets its share of the tolerance.
pub fn double_exponential(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    let rough = quadrature::double_exponential::integrate(&f, a, b, tol.abs.max(1e-300));
    let target = tol.target(rough.integral);
    de_recursive(&f, a, b, target, 0)
}

fn de_recursive(f: &impl Fn(f64) -> f64, a: f64, b: f64, target: f64, depth: u32) -> Result<Estimate> {
    let out = quadrature::double_exponential::integrate(f, a, b, target);
    if out.error_estimate <= target {
        return Ok(Estimate {
            value: out.integral,
            error: out.error_estimate,
        });
    }
    if depth >= 30 {
        return Err(Error::Quadrature(format!(
            "double-exponential rule stalled on [{a}, {b}] with error {:.3e}",
            out.error_estimate
        )));
    }
    let mid = 0.5 * (a + b);
    let l = de_recursive(f, a, mid, 0.5 * target, depth + 1)?;
    let r = de_recursive(f, mid, b, 0.5 * target, depth + 1)?;
    Ok(Estimate {
        value: l.value + r.value,
        error: l.error + r.error,
    })
}

pub fn finite(rule: Rule, f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    match rule {
        Rule::GaussKronrod => gauss_kronrod(f, a, b, tol),
        Rule::DoubleExponential => double_exponential(f, a, b, tol),
    }
}

/// Integral over consecutive segments of a sorted breakpoint list.
pub fn piecewise(rule: Rule, f: impl Fn(f64) -> f64, breakpoints: &[f64], tol: Tolerance) -> Result<Estimate> {
    let n = breakpoints.len().saturating_sub(1).max(1) as f64;
    let piece_tol = Tolerance::new(tol.abs / n, tol.rel);
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for w in breakpoints.windows(2) {
        let e = finite(rule, &f, w[0], w[1], piece_tol)?;
        total.value += e.value;
        total.error += e.error;
    }
    Ok(total)
}

/// ∫_a^∞ f(x) dx through the map x = a + u/(1-u).
pub fn semi_infinite(rule: Rule, f: impl Fn(f64) -> f64, a: f64, tol: Tolerance) -> Result<Estimate> {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        f(a + u / w) / (w * w)
    };
    finite(rule, g, 0.0, 1.0, tol)
}

/// Wynn ε-algorithm applied to a sequence of partial sums. Returns the
/// most advanced even-column entry and the change from the previous one.
pub fn wynn_epsilon(partials: &[f64]) -> (f64, f64) {
    let n = partials.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n < 3 {
        let last = partials[n - 1];
        let prev = if n == 2 { partials[0] } else { f64::INFINITY };
        return (last, (last - prev).abs());
    }
    // columns: prev = ε_{k-1}, cur = ε_k
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partials.to_vec();
    let mut best = partials[n - 1];
    let mut best_prev = partials[n - 2];
    let mut k = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                // sequence already converged at this column
                return (cur[i + 1], 0.0);
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 && !cur.is_empty() {
            let last = cur[cur.len() - 1];
            if !last.is_finite() {
                break;
            }
            best_prev = if cur.len() >= 2 { cur[cur.len() - 2] } else { best };
            best = last;
        }
    }
    (best, (best - best_prev).abs())
}

/// ∫_a^∞ g(x)·cos(xt) dx or ∫_a^∞ g(x)·sin(xt) dx for t > 0 and g decaying
/// at least like 1/x.
pub fn fourier_tail(
    rule: Rule,
    g: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    kind: Oscillation,
    tol: Tolerance,
) -> Result<Estimate> {
    if t <= 0.0 {
        return Err(Error::Quadrature(format!("oscillatory tail needs t > 0, got {t}")));
    }
    let f = |x: f64| {
        g(x) * match kind {
            Oscillation::Cos => (x * t).cos(),
            Oscillation::Sin => (x * t).sin(),
        }
    };
    let half = PI / t;
    let offset = match kind {
        Oscillation::Cos => 0.5,
        Oscillation::Sin => 0.0,
    };
    // first zero of the trigonometric factor at or beyond a
    let mut k = ((a / half) - offset).ceil().max(0.0);
    let mut zero = (k + offset) * half;
    if zero < a {
        k += 1.0;
        zero = (k + offset) * half;
    }
    let chunk_tol = Tolerance::new(tol.abs * 1e-2, tol.rel * 1e-2);
    let head = finite(rule, f, a, zero, chunk_tol)?;
    let mut partials = Vec::with_capacity(64);
    let mut sum = head.value;
    let mut err = head.error;
    let mut last_estimate = f64::NAN;
    let mut settled = 0;
    for _ in 0..MAX_CHUNKS {
        let lo = (k + offset) * half;
        k += 1.0;
        let hi = (k + offset) * half;
        let piece = finite(rule, f, lo, hi, chunk_tol)?;
        sum += piece.value;
        err += piece.error;
        partials.push(sum);
        if partials.len() > 40 {
            partials.remove(0);
        }
        if partials.len() >= 8 {
            let (estimate, change) = wynn_epsilon(&partials);
            let target = tol.target(estimate);
            if change <= target && (estimate - last_estimate).abs() <= target {
                settled += 1;
                if settled >= 2 {
                    return Ok(Estimate {
                        value: estimate,
                        error: change + err,
                    });
                }
            } else {
                settled = 0;
            }
            last_estimate = estimate;
        }
    }
    Err(Error::Quadrature(format!(
        "oscillatory tail from {a} with t = {t} did not settle in {MAX_CHUNKS} chunks"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let tol = Tolerance::default();
        for rule in [Rule::GaussKronrod, Rule::DoubleExponential] {
            let e = finite(rule, |x| 3.0 * x * x, 0.0, 2.0, tol).unwrap();
            assert!((e.value - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn peaked_integrand() {
        let tol = Tolerance::new(1e-12, 1e-10);
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0_f64 / 1e-2).atan();
        for rule in [Rule::GaussKronrod, Rule::DoubleExponential] {
            let e = finite(rule, f, -1.0, 1.0, tol).unwrap();
            assert!((e.value - exact).abs() / exact < 1e-9, "{rule:?}");
        }
    }

    #[test]
    fn semi_infinite_exponential() {
        let e = semi_infinite(Rule::GaussKronrod, |x| (-x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let partials: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let (v, _) = wynn_epsilon(&partials);
        assert!((v - 2.0_f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn dirichlet_tail() {
        // ∫_0^∞ sin(xt)/x dx = π/2 for every t > 0
        for rule in [Rule::GaussKronrod, Rule::DoubleExponential] {
            for t in [0.3, 1.0, 7.0] {
                let g = |x: f64| if x == 0.0 { t } else { 1.0 / x };
                let e = fourier_tail(rule, g, 0.0, t, Oscillation::Sin, Tolerance::default()).unwrap();
                assert!((e.value - PI / 2.0).abs() < 1e-8, "{rule:?} t={t}: {}", e.value);
            }
        }
    }

    #[test]
    fn lorentzian_cosine_transform() {
        // ∫_0^∞ cos(xt)/(1+x²) dx = (π/2)e^{-t}
        for t in [0.05, 1.0, 10.0] {
            let e = fourier_tail(
                Rule::GaussKronrod,
                |x| 1.0 / (1.0 + x * x),
                0.0,
                t,
                Oscillation::Cos,
                Tolerance::default(),
            )
            .unwrap();
            let exact = 0.5 * PI * (-t).exp();
            assert!((e.value - exact).abs() < 1e-9, "t={t}: {} vs {exact}", e.value);
        }
    }
}
