use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use qdsim::bath::{split_spectral_density, write_spectral_density_csv, SpectralDensity};
use qdsim::experiments::{
    compare as compare_traces, config_hash, linspace, noise_average_with_target, run_simulator, run_target,
    sweep as run_sweep, ComparisonResult, EmulationConfig, RunMetadata, RunSummary, SweepVariant,
};
use qdsim::hamiltonians::{build_dqd, project_subspace, DqdParameters, SubspaceHamiltonian};
use qdsim::heom::Trace;
use qdsim::mapping::{
    coherence_budget, eta_upper_limit, feasibility_warnings, scale_report, CoherenceBudget, ControlFields, ScaleReport,
    TargetQuantity,
};
use qdsim::qbs::{fit_qbs, plan_series_counts, qbs_to_spectral_density, FitConstraints, QbsDesign};

use crate::config::FileConfig;
use crate::Failure;

fn load(path: &Path) -> Result<FileConfig, Failure> {
    FileConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn emulation(file: &FileConfig) -> Result<EmulationConfig, Failure> {
    file.emulation().map_err(|e| Failure::Usage(e.to_string()))
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("no such file: {}", path.display())))
    }
}

fn out_dir(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

#[derive(Serialize)]
struct MapReport {
    control_fields: ControlFields,
    dqd: DqdParameters,
    subspace: SubspaceHamiltonian,
    kappa_ev_per_v: f64,
    eta_max_uev: f64,
    coherence: Option<CoherenceBudget>,
    feasible: bool,
    warnings: Vec<String>,
    scaling: ScaleReport,
}

pub fn map(config: &Path, out: &Path) -> Result<(), Failure> {
    let file = load(config)?;
    let cfg = emulation(&file)?;
    let spec = file.mapping()?;
    let fields = cfg.control_fields()?;
    let dqd = cfg.dqd_parameters()?;
    let subspace = project_subspace(&build_dqd(&dqd)?, &dqd);
    let caps = file.caps.caps();
    let warnings = feasibility_warnings(&fields, &caps);
    let coherence = if spec.sigma_epsilon > 0.0 {
        Some(coherence_budget(&spec)?)
    } else {
        None
    };
    let gamma = cfg.gamma();
    let eta_max = eta_upper_limit(gamma, spec.g_factor, caps.delta_b_max)?;
    let t = &cfg.target;
    let quantities = [
        TargetQuantity::time_ps("simulation time", cfg.heom.t_final_ps),
        TargetQuantity::energy_uev("energy span (Δ)", t.system.delta),
        TargetQuantity::energy_uev("coupling (η)", t.system.eta),
        TargetQuantity::energy_uev("bath cutoff (ħω_c)", t.cutoff),
        TargetQuantity::energy_uev("reorganization (λ)", t.reorganization),
    ];
    let scaling = scale_report(gamma, &quantities)?;
    let report = MapReport {
        control_fields: fields,
        dqd,
        subspace,
        kappa_ev_per_v: cfg.kappa()?,
        eta_max_uev: eta_max,
        coherence,
        feasible: warnings.is_empty(),
        warnings,
        scaling,
    };

    println!("γ = T/T_qs = {gamma:.6e}");
    println!(
        "ε_d = {:.3} μeV   B_avg = {:.2} T   ΔB = {:.1} mT",
        fields.detuning,
        fields.b_avg,
        fields.delta_b * 1e3
    );
    println!(
        "subspace: Δ_qs = {:.4} μeV, η_qs = {:.4} μeV; κ = {:.4} eV/V; η_max = {:.1} μeV",
        subspace.delta_qs, subspace.eta_qs, report.kappa_ev_per_v, eta_max
    );
    if let Some(c) = coherence {
        println!(
            "τ_d = {:.3} ns ({:.3} ps in the target frame)",
            c.tau_d_ns, c.tau_target_ps
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!();
    print!("{}", report.scaling.render());

    out_dir(out)?;
    write_json(&out.join("map_report.json"), &report)
}

#[derive(Serialize)]
struct SynthesisSummary {
    seed: u64,
    n_units: usize,
    active_units: usize,
    kappa_ev_per_v: f64,
    residual_max: f64,
    residual_l2: f64,
    parasitic_ff: Vec<f64>,
    peak_uev: Vec<f64>,
    infeasible_units: Vec<usize>,
}

fn peak(sd: &SpectralDensity, grid: &[f64]) -> f64 {
    grid.iter().map(|&w| sd.value(w)).fold(0.0, f64::max)
}

pub fn synthesize(config: &Path, out: &Path, seed: u64) -> Result<(), Failure> {
    let file = load(config)?;
    let cfg = emulation(&file)?;
    let q = file
        .qbs
        .as_ref()
        .ok_or_else(|| Failure::Usage("config has no [qbs] section".into()))?;
    let target = cfg.target.spectral_density()?;
    let split = q.split_mev.unwrap_or(file.target.cutoff_mev) * 1e3;
    let (_, high) = split_spectral_density(&target, split)?;
    let kappa = cfg.kappa()?;
    let gamma = cfg.gamma();
    let constraints = FitConstraints {
        gamma: q.damping_mev * 1e3,
        kappa,
        gamma_ratio: gamma,
        samples: q.samples,
    };
    let band = (q.band_mev[0] * 1e3, q.band_mev[1] * 1e3);
    let fit = fit_qbs(&high, q.n_units, band, constraints)?;
    let mut design = fit.design()?;
    let mut infeasible = Vec::new();
    if let Some(max) = q.max_unit_impedance_kohm {
        let plan = plan_series_counts(&design, max * 1e3, q.series_cap)?;
        infeasible = plan.infeasible;
        design = plan.design;
    }

    out_dir(out)?;
    fs::write(out.join("qbs_design.json"), design.to_json()?)?;
    let mut w = BufWriter::new(File::create(out.join("qbs_fit.csv"))?);
    writeln!(w, "omega_uev,target_uev,fitted_uev")?;
    for ((x, t), f) in fit.grid.iter().zip(&fit.target).zip(&fit.fitted) {
        writeln!(w, "{x},{t},{f}")?;
    }
    w.flush()?;

    let mut parasitic = vec![0.0];
    parasitic.extend(q.parasitic_ff.iter().copied());
    let grid: Vec<f64> = (0..=1000).map(|i| 2.0 * band.1 * i as f64 / 1000.0).collect();
    let spectra = parasitic
        .iter()
        .map(|&cp| qbs_to_spectral_density(&design.with_parasitic(cp * 1e-15), kappa, gamma))
        .collect::<qdsim::Result<Vec<_>>>()?;
    let mut w = BufWriter::new(File::create(out.join("qbs_parasitic.csv"))?);
    let head: Vec<String> = parasitic.iter().map(|cp| format!("j_cp_{cp}ff_uev")).collect();
    writeln!(w, "omega_uev,{}", head.join(","))?;
    for &x in &grid {
        let row: Vec<String> = spectra.iter().map(|s| s.value(x).to_string()).collect();
        writeln!(w, "{x},{}", row.join(","))?;
    }
    w.flush()?;

    let summary = SynthesisSummary {
        seed,
        n_units: q.n_units,
        active_units: design.units.len(),
        kappa_ev_per_v: kappa,
        residual_max: fit.residual_max,
        residual_l2: fit.residual_l2,
        peak_uev: spectra.iter().map(|s| peak(s, &grid)).collect(),
        parasitic_ff: parasitic,
        infeasible_units: infeasible,
    };
    println!(
        "{} of {} units active; residual {:.3} of peak (L2 {:.3})",
        summary.active_units, summary.n_units, summary.residual_max, summary.residual_l2
    );
    for (cp, p) in summary.parasitic_ff.iter().zip(&summary.peak_uev) {
        println!("C_p = {cp} fF: peak J = {p:.1} μeV");
    }
    if !summary.infeasible_units.is_empty() {
        eprintln!(
            "warning: {} units need more than {} series elements",
            summary.infeasible_units.len(),
            q.series_cap
        );
    }
    write_json(&out.join("qbs_summary.json"), &summary)
}

fn write_comparison(path: &Path, c: &ComparisonResult) -> Result<(), Failure> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "time_target_ps,fidelity,sigma_z_target,sigma_z_sim,leakage,subspace_weight"
    )?;
    for i in 0..c.fidelity.len() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            c.times_target_ps[i],
            c.fidelity[i],
            c.sigma_z_target[i],
            c.sigma_z_sim[i],
            c.leakage[i],
            c.subspace_weight[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    #[serde(flatten)]
    run: RunSummary,
}

pub fn emulate(config: &Path, out: &Path, seed: u64) -> Result<(), Failure> {
    let file = load(config)?;
    let cfg = emulation(&file)?;
    out_dir(out)?;
    let start = Instant::now();
    let target = run_target(&cfg)?;
    let (sim, cmp) = if cfg.noise.is_some() {
        let avg = noise_average_with_target(&cfg, target.clone())?;
        (avg.averaged, avg.comparison)
    } else {
        let sim = run_simulator(&cfg)?;
        let cmp = compare_traces(&target, &sim)?;
        (sim, cmp)
    };
    let runtime_s = start.elapsed().as_secs_f64();

    let sim_problem = cfg.simulator_problem(0.0)?;
    target.write_csv(&out.join("target.csv"))?;
    sim.write_csv(&out.join("simulator.csv"))?;
    RunMetadata::new("target", &cfg, &cfg.target_problem()?)?.write(&out.join("target.json"))?;
    RunMetadata::new("simulator", &cfg, &sim_problem)?.write(&out.join("simulator.json"))?;
    write_comparison(&out.join("comparison.csv"), &cmp)?;
    let summary = Summary {
        seed,
        run: RunSummary {
            config_hash: config_hash(&cfg)?,
            min_fidelity: Some(cmp.min_fidelity),
            max_leakage: Some(cmp.max_leakage),
            runtime_s,
            hierarchy_size: sim_problem.hierarchy_size()?,
        },
    };
    write_json(&out.join("summary.json"), &summary)?;
    println!(
        "min F = {:.6}   max leakage = {:.3e}   ({:.1} s)",
        cmp.min_fidelity, cmp.max_leakage, runtime_s
    );
    Ok(())
}

fn parse_grid(grid: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("--grid expects <k_s points>x<t_c points>, got {grid:?}"));
    let (a, b) = grid.split_once(['x', 'X']).ok_or_else(bad)?;
    let n_ks: usize = a.trim().parse().map_err(|_| bad())?;
    let n_tc: usize = b.trim().parse().map_err(|_| bad())?;
    if n_ks == 0 || n_tc == 0 {
        return Err(bad());
    }
    Ok((n_ks, n_tc))
}

#[derive(Serialize)]
struct SweepSummary {
    seed: u64,
    variant: SweepVariant,
    config_hash: String,
    sensitivities: Vec<f64>,
    tunnel_couplings_uev: Vec<f64>,
    failures: Vec<qdsim::experiments::CellFailure>,
    runtime_s: f64,
}

pub fn sweep(
    config: &Path,
    out: &Path,
    grid: &str,
    variant: &str,
    ks_range: (f64, f64),
    tc_range: (f64, f64),
    seed: u64,
) -> Result<(), Failure> {
    let (n_ks, n_tc) = parse_grid(grid)?;
    let v = SweepVariant::parse(variant).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown variant {variant:?}; use pristine, drop_qd_leak, drop_qbs_leak or noisy"
        ))
    })?;
    let file = load(config)?;
    let cfg = emulation(&file)?;
    out_dir(out)?;
    let ks = linspace(ks_range.0, ks_range.1, n_ks);
    let tc = linspace(tc_range.0, tc_range.1, n_tc);
    let start = Instant::now();
    let result = run_sweep(&cfg, &ks, &tc, v)?;
    let stem = format!("sweep_{}", v.name());
    let fid_path: PathBuf = out.join(format!("{stem}_min_fidelity.csv"));
    result.write_fidelity_csv(&fid_path)?;
    result.write_leakage_csv(&out.join(format!("{stem}_max_leakage.csv")))?;
    for f in &result.failures {
        eprintln!(
            "cell k_s = {}, t_c = {} μeV failed: {}",
            f.sensitivity, f.tunnel_coupling, f.error
        );
    }
    let summary = SweepSummary {
        seed,
        variant: v,
        config_hash: config_hash(&cfg)?,
        sensitivities: ks,
        tunnel_couplings_uev: tc,
        failures: result.failures.clone(),
        runtime_s: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join(format!("{stem}_summary.json")), &summary)?;
    println!(
        "{} of {} cells computed; map in {}",
        n_ks * n_tc - result.failures.len(),
        n_ks * n_tc,
        fid_path.display()
    );
    if result.failures.len() == n_ks * n_tc {
        return Err(Failure::Numerical("every cell failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareSummary {
    min_fidelity: f64,
    max_leakage: f64,
    samples: usize,
}

pub fn compare(target: &Path, sim: &Path, out: &Path) -> Result<(), Failure> {
    require_file(target)?;
    require_file(sim)?;
    let t = Trace::read_csv(target)?;
    let s = Trace::read_csv(sim)?;
    let cmp = compare_traces(&t, &s)?;
    out_dir(out)?;
    write_comparison(&out.join("comparison.csv"), &cmp)?;
    let summary = CompareSummary {
        min_fidelity: cmp.min_fidelity,
        max_leakage: cmp.max_leakage,
        samples: cmp.fidelity.len(),
    };
    write_json(&out.join("comparison_summary.json"), &summary)?;
    println!(
        "min F = {:.6}   max leakage = {:.3e}",
        cmp.min_fidelity, cmp.max_leakage
    );
    Ok(())
}

pub fn qbs_spectrum(
    design: &Path,
    kappa: f64,
    gamma: f64,
    max_mev: f64,
    points: usize,
    parasitic_ff: f64,
    out: &Path,
) -> Result<(), Failure> {
    require_file(design)?;
    let text = fs::read_to_string(design)?;
    let d = QbsDesign::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", design.display())))?;
    if points == 0 || max_mev.is_nan() || max_mev <= 0.0 {
        return Err(Failure::Usage(
            "need a positive --max-mev and at least one point".into(),
        ));
    }
    let sd = qbs_to_spectral_density(&d.with_parasitic(parasitic_ff * 1e-15), kappa, gamma)?;
    let grid: Vec<f64> = (0..=points).map(|i| max_mev * 1e3 * i as f64 / points as f64).collect();
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        out_dir(dir)?;
    }
    write_spectral_density_csv(out, &sd, &grid)?;
    println!(
        "peak J = {:.3} μeV; {} points in {}",
        peak(&sd, &grid),
        grid.len(),
        out.display()
    );
    Ok(())
}
