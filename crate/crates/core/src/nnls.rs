//! Nonnegative least squares (Lawson–Hanson active-set method).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves `min ‖A x − b‖₂` subject to `x ≥ 0`.
///
/// Columns are normalised internally, so badly scaled bases (as produced by
/// Lorentzians of very different heights) do not stall the active set.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::Fit(format!("rhs has {} rows, matrix {m}", b.len())));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut scaled = a.clone();
    for (j, &s) in norms.iter().enumerate() {
        if s > 0.0 {
            scaled.column_mut(j).scale_mut(1.0 / s);
        }
    }
    let a = &scaled;
    let usable: Vec<bool> = norms.iter().map(|&s| s > 0.0).collect();

    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * b.norm().max(1e-300) * (m.max(n) as f64);
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && usable[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = candidate else {
            break;
        };
        passive[t] = true;

        loop {
            let z = solve_passive(a, b, &passive)?;
            let feasible = (0..n).all(|j| !passive[j] || z[j] > 0.0);
            if feasible {
                x = z;
                break;
            }
            // step back to the boundary of the feasible region
            let mut alpha = f64::INFINITY;
            for j in 0..n {
                if passive[j] && z[j] <= 0.0 {
                    let denom = x[j] - z[j];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            x += (z - &x) * alpha;
            for j in 0..n {
                if passive[j] && x[j] <= 1e-15 * x.amax().max(1e-300) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }

    for j in 0..n {
        if norms[j] > 0.0 {
            x[j] /= norms[j];
        } else {
            x[j] = 0.0;
        }
    }
    Ok(x)
}

/// Unconstrained least squares restricted to the passive columns.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> Result<DVector<f64>> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(&idx);
    let svd = sub.svd(true, true);
    let sol = svd
        .solve(b, 1e-14)
        .map_err(|e| Error::Fit(format!("least-squares solve failed: {e}")))?;
    let mut z = DVector::zeros(passive.len());
    for (k, &j) in idx.iter().enumerate() {
        z[j] = sol[k];
    }
    Ok(z)
}
