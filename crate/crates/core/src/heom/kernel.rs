//! Per-ADO right-hand side of the hierarchy coupling, monomorphised over
//! the system dimension.

use num_complex::Complex64;

use super::hierarchy::NONE;
use crate::linalg::ZERO;

/// Neighbour tables and coefficients shared by every RHS evaluation.
pub(crate) struct Tables {
    pub k: usize,
    pub plus: Vec<u32>,
    pub plus_coef: Vec<f64>,
    pub minus: Vec<u32>,
    pub minus_c: Vec<Complex64>,
    pub minus_cbar: Vec<Complex64>,
}

pub(crate) struct Operators<const N: usize> {
    pub s: [[Complex64; N]; N],
    pub delta: f64,
}

impl<const N: usize> Operators<N> {
    pub fn from_flat(s: &[Complex64], delta: f64) -> Self {
        let mut m = [[ZERO; N]; N];
        for (r, row) in m.iter_mut().enumerate() {
            row.copy_from_slice(&s[r * N..(r + 1) * N]);
        }
        Self { s: m, delta }
    }
}

#[inline(always)]
fn load<const N: usize>(src: &[Complex64]) -> [[Complex64; N]; N] {
    let mut m = [[ZERO; N]; N];
    for (r, row) in m.iter_mut().enumerate() {
        row.copy_from_slice(&src[r * N..(r + 1) * N]);
    }
    m
}

/// Hierarchy part of dρ_i/dt:
/// `−i(S X − Y S) − δ[S,[S,ρ_i]]` with `X = P + A`, `Y = P + B`,
/// `P = Σ_k √((n_k+1)s_k) ρ_{n+e_k}`, `A = Σ_k √(n_k/s_k) c_k ρ_{n−e_k}`
/// and `B` the same with c̄_k.
pub(crate) fn rhs_ado<const N: usize>(
    i: usize,
    y: &[Complex64],
    out: &mut [Complex64],
    tab: &Tables,
    ops: &Operators<N>,
) {
    let nn = N * N;
    let mut x = [[ZERO; N]; N];
    let mut yy = [[ZERO; N]; N];
    for t in 0..tab.k {
        let idx = i * tab.k + t;
        let j = tab.plus[idx];
        if j != NONE {
            let coef = tab.plus_coef[idx];
            let m = &y[j as usize * nn..(j as usize + 1) * nn];
            for r in 0..N {
                for c in 0..N {
                    let v = m[r * N + c] * coef;
                    x[r][c] += v;
                    yy[r][c] += v;
                }
            }
        }
        let j = tab.minus[idx];
        if j != NONE {
            let (a, b) = (tab.minus_c[idx], tab.minus_cbar[idx]);
            let m = &y[j as usize * nn..(j as usize + 1) * nn];
            for r in 0..N {
                for c in 0..N {
                    let v = m[r * N + c];
                    x[r][c] += v * a;
                    yy[r][c] += v * b;
                }
            }
        }
    }
    let s = &ops.s;
    for r in 0..N {
        for c in 0..N {
            let mut acc = ZERO;
            for m in 0..N {
                acc += s[r][m] * x[m][c] - yy[r][m] * s[m][c];
            }
            out[r * N + c] = Complex64::new(acc.im, -acc.re);
        }
    }
    if ops.delta != 0.0 {
        let rho: [[Complex64; N]; N] = load(&y[i * nn..(i + 1) * nn]);
        let mut sr = [[ZERO; N]; N];
        let mut rs = [[ZERO; N]; N];
        for r in 0..N {
            for c in 0..N {
                let mut a = ZERO;
                let mut b = ZERO;
                for m in 0..N {
                    a += s[r][m] * rho[m][c];
                    b += rho[r][m] * s[m][c];
                }
                sr[r][c] = a;
                rs[r][c] = b;
            }
        }
        // [S,[S,ρ]] = S(Sρ − ρS) − (Sρ − ρS)S
        for r in 0..N {
            for c in 0..N {
                let mut acc = ZERO;
                for m in 0..N {
                    let comm_mc = sr[m][c] - rs[m][c];
                    let comm_rm = sr[r][m] - rs[r][m];
                    acc += s[r][m] * comm_mc - comm_rm * s[m][c];
                }
                out[r * N + c] -= acc * ops.delta;
            }
        }
    }
}
