//! Small dense complex linear-algebra helpers built on nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Builds a complex matrix from real entries given row by row.
pub fn real_matrix(n: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), n * n);
    CMatrix::from_fn(n, n, |i, j| Complex64::new(entries[i * n + j], 0.0))
}

pub fn projector(n: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(k, k)] = ONE;
    m
}

/// Largest absolute entry of `m - m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// True when `m` is Hermitian to `rel_tol` of its largest entry (absolute
/// floor 1e-300 so the zero matrix passes).
pub fn is_hermitian(m: &CMatrix, rel_tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= rel_tol * max_abs(m).max(1e-300)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Eigen-decomposition of a Hermitian matrix. The input is symmetrised
/// first so round-off asymmetry does not leak into the result.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    (eig.eigenvalues, eig.eigenvectors)
}

pub fn eigenvalues_hermitian(m: &CMatrix) -> Vec<f64> {
    let (vals, _) = hermitian_eigen(m);
    let mut v: Vec<f64> = vals.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let diag = CMatrix::from_diagonal(&DVector::from_iterator(
        n,
        vals.iter().map(|&v| Complex64::new(f(v), 0.0)),
    ));
    &vecs * diag * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are
/// clipped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |v| v.max(0.0).sqrt())
}

/// Half of the spectral width of a Hermitian matrix, i.e. the largest
/// eigenvalue magnitude once the spectrum is centred. This is the fastest
/// angular frequency of the Hamiltonian up to an irrelevant global phase.
pub fn spectral_half_width(m: &CMatrix) -> f64 {
    let v = eigenvalues_hermitian(m);
    match (v.first(), v.last()) {
        (Some(lo), Some(hi)) => 0.5 * (hi - lo),
        _ => 0.0,
    }
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    eigenvalues_hermitian(m)
        .into_iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}
