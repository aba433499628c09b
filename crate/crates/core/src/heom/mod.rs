//! Hierarchical equations of motion for one system coupled to one bath
//! through a single operator `S`.
//!
//! Scaled ADOs, a Markovian terminator `−δ[S,[S,ρ]]`, and a fixed-step
//! integrating-factor RK4 in the eigenbasis of `H`: the free evolution and
//! the `−Σ n_k ν_k` damping are applied exactly, RK4 handles only the
//! hierarchy coupling.

mod hierarchy;
mod kernel;
mod trace;

use num_complex::Complex64;
use rayon::prelude::*;

pub use hierarchy::{hierarchy_size, Hierarchy};
pub use trace::Trace;

use crate::bath::ExponentialBathDecomposition;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::linalg::{eigenvalues_hermitian, hermitian_eigen, hermitian_function, is_hermitian, trace, CMatrix, ZERO};
use crate::units::{ns_to_reduced, reduced_to_ns, thermal_energy};
use kernel::{rhs_ado, Operators, Tables};

/// Largest system dimension with a compiled kernel.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone)]
pub struct HeomProblem {
    pub h_sys: CMatrix,
    pub coupling_op: CMatrix,
    pub decomposition: ExponentialBathDecomposition,
    pub depth: usize,
    pub rho0: CMatrix,
}

impl HeomProblem {
    pub fn new(
        h_sys: CMatrix,
        coupling_op: CMatrix,
        decomposition: ExponentialBathDecomposition,
        depth: usize,
        rho0: CMatrix,
    ) -> Result<Self> {
        let p = Self {
            h_sys,
            coupling_op,
            decomposition,
            depth,
            rho0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.h_sys.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.h_sys.nrows();
        if n == 0 || n > MAX_DIM {
            return Err(invalid("h_sys", format!("dimension must be 1..={MAX_DIM}, got {n}")));
        }
        for (name, m) in [
            ("h_sys", &self.h_sys),
            ("coupling_op", &self.coupling_op),
            ("rho0", &self.rho0),
        ] {
            if m.nrows() != n || m.ncols() != n {
                return Err(invalid(name, format!("must be {n}×{n}")));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(invalid(name, "non-finite entry"));
            }
            if !is_hermitian(m, 1e-10) {
                return Err(invalid(name, "must be Hermitian"));
            }
        }
        if (trace(&self.rho0) - 1.0).norm() > 1e-10 {
            return Err(invalid("rho0", "must have unit trace"));
        }
        if eigenvalues_hermitian(&self.rho0)[0] < -1e-10 {
            return Err(invalid("rho0", "must be positive semidefinite"));
        }
        if self.depth == 0 {
            return Err(invalid("depth", "must be at least 1"));
        }
        self.decomposition.validate()?;
        conjugate_partners(&self.decomposition)?;
        Ok(())
    }

    pub fn hierarchy_size(&self) -> Result<usize> {
        hierarchy_size(self.decomposition.len(), self.depth)
    }

    /// Fastest rate (μeV) of the part of the generator integrated by RK4:
    /// `‖ad_S‖·√(L·max|c_k|) + δ‖ad_S‖²`, with ‖ad_S‖ the spread of S's
    /// spectrum.
    pub fn coupling_rate(&self) -> f64 {
        let ev = eigenvalues_hermitian(&self.coupling_op);
        let ad = ev[ev.len() - 1] - ev[0];
        let cmax = self.decomposition.terms.iter().fold(0.0_f64, |m, k| m.max(k.c.norm()));
        ad * (self.depth as f64 * cmax).sqrt() + self.decomposition.delta_strength.abs() * ad * ad
    }

    /// Largest admissible time step in ns, or infinity without coupling.
    pub fn max_stable_dt(&self) -> f64 {
        let w = self.coupling_rate();
        if w > 0.0 {
            reduced_to_ns(0.1 / w)
        } else {
            f64::INFINITY
        }
    }
}

/// For every term k the index p(k) with ν_p = ν_k*, so that
/// `C(t)* = Σ_k c_p(k)* e^{−ν_k t}`.
fn conjugate_partners(d: &ExponentialBathDecomposition) -> Result<Vec<usize>> {
    d.terms
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let target = t.nu.conj();
            let tol = 1e-12 * t.nu.norm().max(1.0);
            if (t.nu - target).norm() <= tol {
                return Ok(k);
            }
            d.terms
                .iter()
                .position(|o| (o.nu - target).norm() <= tol)
                .ok_or_else(|| {
                    invalid(
                        "decomposition",
                        format!("term {k} has no complex-conjugate partner rate"),
                    )
                })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PropagationOptions {
    /// Number of sampling intervals; the trace holds `samples + 1` points.
    pub samples: usize,
    /// Simulator-to-target time scale γ used for `times_target_ps`.
    pub gamma_ratio: f64,
    pub basis: Vec<String>,
    pub subspace: Option<[usize; 2]>,
    pub memory_limit_bytes: u128,
    /// Enforce `dt ≤ max_stable_dt`.
    pub check_dt: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            samples: 500,
            gamma_ratio: 1.0,
            basis: Vec::new(),
            subspace: None,
            memory_limit_bytes: 8 << 30,
            check_dt: true,
        }
    }
}

/// Full hierarchy at the end of a propagation, in the original basis.
#[derive(Debug, Clone)]
pub struct HeomState {
    pub hierarchy: Hierarchy,
    pub ados: Vec<CMatrix>,
    pub time_ns: f64,
}

impl HeomState {
    pub fn reduced(&self) -> &CMatrix {
        &self.ados[0]
    }

    pub fn ado(&self, multi: &[u8]) -> Option<&CMatrix> {
        self.hierarchy.index_of(multi).map(|i| &self.ados[i])
    }
}

/// Bytes held by the propagation: six state-sized buffers plus the
/// neighbour tables.
pub fn memory_estimate(n_ado: usize, n_terms: usize, dim: usize) -> u128 {
    let n_ado = n_ado as u128;
    let state = n_ado * (dim * dim) as u128 * 16;
    let tables = n_ado * n_terms as u128 * (4 + 4 + 8 + 16 + 16) + n_ado * (n_terms as u128 + 16);
    6 * state + tables
}

/// Propagates to `t_final` (ns) with step at most `dt` (ns), 500 samples.
pub fn propagate(problem: &HeomProblem, t_final: f64, dt: f64) -> Result<Trace> {
    propagate_with(problem, t_final, dt, &PropagationOptions::default()).map(|(t, _)| t)
}

pub fn propagate_with(
    problem: &HeomProblem,
    t_final: f64,
    dt: f64,
    options: &PropagationOptions,
) -> Result<(Trace, HeomState)> {
    problem.validate()?;
    ensure_positive("t_final", t_final)?;
    ensure_positive("dt", dt)?;
    ensure_positive("gamma_ratio", options.gamma_ratio)?;
    if options.samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    let limit = problem.max_stable_dt();
    if options.check_dt && dt > limit {
        return Err(Error::TimeStep {
            dt_ns: dt,
            limit_ns: limit,
        });
    }
    let n = problem.dim();
    let k = problem.decomposition.len();
    let n_ado = problem.hierarchy_size()?;
    let bytes = memory_estimate(n_ado, k, n);
    if bytes > options.memory_limit_bytes {
        return Err(Error::Memory {
            ados: n_ado,
            bytes,
            limit: options.memory_limit_bytes,
        });
    }
    let basis = if options.basis.len() == n {
        options.basis.clone()
    } else {
        (0..n).map(|i| i.to_string()).collect()
    };

    let steps_per_sample = (t_final / (options.samples as f64 * dt)).ceil().max(1.0) as usize;
    let h_ns = t_final / (options.samples * steps_per_sample) as f64;
    let mut engine = Engine::new(problem, ns_to_reduced(h_ns))?;

    let mut times = Vec::with_capacity(options.samples + 1);
    let mut states = Vec::with_capacity(options.samples + 1);
    times.push(0.0);
    states.push(engine.reduced());
    for s in 1..=options.samples {
        for _ in 0..steps_per_sample {
            engine.step();
        }
        let t = h_ns * (s * steps_per_sample) as f64;
        engine.check(t)?;
        times.push(t);
        states.push(engine.reduced());
    }
    let state = HeomState {
        ados: engine.all_ados(),
        hierarchy: engine.hierarchy,
        time_ns: t_final,
    };
    Ok((
        Trace::new(times, options.gamma_ratio, basis, options.subspace, states),
        state,
    ))
}

/// exp(−H/k_BT)/Z; `temperature = ∞` gives the maximally mixed state.
pub fn thermal_expectation(h_sys: &CMatrix, temperature: f64) -> Result<CMatrix> {
    if !(temperature > 0.0) {
        return Err(invalid("temperature", format!("must be positive, got {temperature}")));
    }
    let kt = thermal_energy(temperature);
    let e_min = eigenvalues_hermitian(h_sys)[0];
    let w = hermitian_function(h_sys, |e| (-(e - e_min) / kt).exp());
    let z = trace(&w).re;
    Ok(w.unscale(z))
}

struct Generator {
    n: usize,
    s: Vec<Complex64>,
    delta: f64,
    tables: Tables,
}

impl Generator {
    fn rhs(&self, input: &[Complex64], out: &mut [Complex64]) {
        macro_rules! dispatch {
            ($($d:literal)*) => {
                match self.n {
                    $($d => {
                        let ops = Operators::<$d>::from_flat(&self.s, self.delta);
                        out.par_chunks_mut($d * $d)
                            .with_min_len(MIN_CHUNK)
                            .enumerate()
                            .for_each(|(i, o)| rhs_ado::<$d>(i, input, o, &self.tables, &ops));
                    })*
                    _ => unreachable!("dimension checked in validate"),
                }
            };
        }
        dispatch!(1 2 3 4 5 6 7 8);
    }
}

struct Engine {
    hierarchy: Hierarchy,
    n: usize,
    h: f64,
    u: CMatrix,
    gen: Generator,
    /// exp(−Σ n_k ν_k h/2) per ADO.
    damp_half: Vec<Complex64>,
    /// exp(−i(E_i − E_j)h/2) per matrix element.
    phase_half: Vec<Complex64>,
    y: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    d: Vec<Complex64>,
    w: Vec<Complex64>,
}

const MIN_CHUNK: usize = 32;

impl Engine {
    fn new(p: &HeomProblem, h: f64) -> Result<Self> {
        let n = p.dim();
        let nn = n * n;
        let terms = &p.decomposition.terms;
        let k = terms.len();
        let hierarchy = Hierarchy::new(k, p.depth)?;
        let n_ado = hierarchy.len();
        let partners = conjugate_partners(&p.decomposition)?;

        let (energies, u) = hermitian_eigen(&p.h_sys);
        let to_eigen = |m: &CMatrix| u.adjoint() * m * &u;
        let s_eig = to_eigen(&p.coupling_op);
        let rho0 = to_eigen(&p.rho0);

        let scale: Vec<f64> = terms
            .iter()
            .map(|t| if t.c.norm() > 0.0 { t.c.norm() } else { 1.0 })
            .collect();
        let cbar: Vec<Complex64> = partners.iter().map(|&q| terms[q].c.conj()).collect();
        let mut plus_coef = vec![0.0; n_ado * k];
        let mut minus_c = vec![ZERO; n_ado * k];
        let mut minus_cbar = vec![ZERO; n_ado * k];
        let mut damp_half = vec![ZERO; n_ado];
        for i in 0..n_ado {
            let multi = hierarchy.multi_index(i);
            let mut rate = ZERO;
            for t in 0..k {
                let nk = multi[t] as f64;
                rate += terms[t].nu * nk;
                plus_coef[i * k + t] = ((nk + 1.0) * scale[t]).sqrt();
                let m = (nk / scale[t]).sqrt();
                minus_c[i * k + t] = terms[t].c * m;
                minus_cbar[i * k + t] = cbar[t] * m;
            }
            damp_half[i] = (-rate * (0.5 * h)).exp();
        }
        let mut phase_half = vec![ZERO; nn];
        for r in 0..n {
            for c in 0..n {
                phase_half[r * n + c] = Complex64::new(0.0, -(energies[r] - energies[c]) * 0.5 * h).exp();
            }
        }
        let tables = Tables {
            k,
            plus: hierarchy.plus.clone(),
            plus_coef,
            minus: hierarchy.minus.clone(),
            minus_c,
            minus_cbar,
        };
        let mut y = vec![ZERO; n_ado * nn];
        for r in 0..n {
            for c in 0..n {
                y[r * n + c] = rho0[(r, c)];
            }
        }
        let s: Vec<Complex64> = (0..nn).map(|i| s_eig[(i / n, i % n)]).collect();
        let zeros = vec![ZERO; n_ado * nn];
        Ok(Self {
            hierarchy,
            n,
            h,
            u,
            gen: Generator {
                n,
                s,
                delta: p.decomposition.delta_strength,
                tables,
            },
            damp_half,
            phase_half,
            y,
            a: zeros.clone(),
            b: zeros.clone(),
            c: zeros.clone(),
            d: zeros.clone(),
            w: zeros,
        })
    }

    /// Applies `f(ado, element, input...)` across the state in parallel.
    fn map_into(out: &mut [Complex64], nn: usize, f: impl Fn(usize, usize, usize) -> Complex64 + Sync) {
        out.par_chunks_mut(nn)
            .with_min_len(MIN_CHUNK)
            .enumerate()
            .for_each(|(i, o)| {
                for (e, v) in o.iter_mut().enumerate() {
                    *v = f(i, e, i * nn + e);
                }
            });
    }

    /// One Lawson RK4 step with the exact propagator E = exp(hL) of the
    /// diagonal linear part:
    /// a = N(y), b = N(E½(y + h/2·a)), c = N(E½y + h/2·b),
    /// d = N(E y + h·E½ c),
    /// y' = E(y + h/6·a) + E½(h/3·(b + c)) + h/6·d.
    fn step(&mut self) {
        let nn = self.n * self.n;
        let h = self.h;
        let (damp, phase) = (&self.damp_half, &self.phase_half);
        let half = |i: usize, e: usize| damp[i] * phase[e];

        self.gen.rhs(&self.y, &mut self.a);
        {
            let (y, a) = (&self.y, &self.a);
            Self::map_into(&mut self.w, nn, |i, e, x| half(i, e) * (y[x] + a[x] * (0.5 * h)));
        }
        self.gen.rhs(&self.w, &mut self.b);
        {
            let (y, b) = (&self.y, &self.b);
            Self::map_into(&mut self.w, nn, |i, e, x| half(i, e) * y[x] + b[x] * (0.5 * h));
        }
        self.gen.rhs(&self.w, &mut self.c);
        {
            let (y, c) = (&self.y, &self.c);
            Self::map_into(&mut self.w, nn, |i, e, x| {
                let eh = half(i, e);
                eh * (eh * y[x] + c[x] * h)
            });
        }
        self.gen.rhs(&self.w, &mut self.d);
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        self.y
            .par_chunks_mut(nn)
            .with_min_len(MIN_CHUNK)
            .enumerate()
            .for_each(|(i, o)| {
                for (e, v) in o.iter_mut().enumerate() {
                    let x = i * nn + e;
                    let eh = half(i, e);
                    *v = eh * (eh * (*v + a[x] * (h / 6.0)) + (b[x] + c[x]) * (h / 3.0)) + d[x] * (h / 6.0);
                }
            });
    }

    fn eigen_ado(&self, i: usize) -> CMatrix {
        let nn = self.n * self.n;
        CMatrix::from_fn(self.n, self.n, |r, c| self.y[i * nn + r * self.n + c])
    }

    fn reduced(&self) -> CMatrix {
        &self.u * self.eigen_ado(0) * self.u.adjoint()
    }

    fn all_ados(&self) -> Vec<CMatrix> {
        (0..self.hierarchy.len())
            .map(|i| &self.u * self.eigen_ado(i) * self.u.adjoint())
            .collect()
    }

    fn check(&self, t_ns: f64) -> Result<()> {
        let tr: Complex64 = (0..self.n).map(|r| self.y[r * self.n + r]).sum();
        if !(tr.re.is_finite() && tr.im.is_finite()) || (tr - 1.0).norm() > 1e-4 {
            return Err(Error::Divergence {
                time_ns: t_ns,
                reason: format!("trace of the reduced density matrix drifted to {tr}"),
            });
        }
        let worst = self
            .y
            .par_chunks(4096)
            .map(|ch| {
                ch.iter().fold(0.0_f64, |m, z| {
                    if z.norm().is_finite() {
                        m.max(z.norm())
                    } else {
                        f64::INFINITY
                    }
                })
            })
            .reduce(|| 0.0, f64::max);
        if !(worst <= 1e100) {
            return Err(Error::Divergence {
                time_ns: t_ns,
                reason: format!("ADO magnitude reached {worst:e}"),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
