use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

#[derive(Parser)]
#[command(
    name = "qdsim",
    version,
    about = "Emulate a two-level open quantum system on a double quantum dot and RLC bath synthesizer"
)]
struct Cli {
    /// Worker threads; OQS_THREADS overrides this
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed recorded in run summaries (all fits and runs are deterministic)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run description
    #[arg(short, long)]
    config: PathBuf,

    /// Output directory
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Control fields, feasibility and the target-to-simulator scaling table
    Map(ConfigArgs),
    /// Fit an RLC array to the high-frequency part of the target bath
    Synthesize(ConfigArgs),
    /// Run target and simulator HEOM and compare them
    Emulate(ConfigArgs),
    /// Min-fidelity heat map over (k_s, t_c)
    Sweep {
        #[command(flatten)]
        io: ConfigArgs,
        /// Grid size as <k_s points>x<t_c points>
        #[arg(long, default_value = "4x4")]
        grid: String,
        /// pristine, drop_qd_leak, drop_qbs_leak or noisy
        #[arg(long, default_value = "pristine")]
        variant: String,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.25, 0.9])]
        ks_range: Vec<f64>,
        /// Tunnel-coupling range (μeV)
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [10.0, 100.0])]
        tc_range_uev: Vec<f64>,
    },
    /// Fidelity and leakage between two trace CSVs
    Compare {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        sim: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Tabulate the spectral density synthesized by a design
    QbsSpectrum {
        /// Design JSON written by `synthesize`
        #[arg(long)]
        design: PathBuf,
        /// κ = α k_s / n (eV/V)
        #[arg(long)]
        kappa_ev_per_v: f64,
        /// Temperature ratio γ = T/T_qs
        #[arg(long)]
        gamma: f64,
        /// Upper end of the target-frame grid (meV)
        #[arg(long, default_value_t = 100.0)]
        max_mev: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Parasitic capacitance added to every unit (fF)
        #[arg(long, default_value_t = 0.0)]
        parasitic_ff: f64,
        /// Output CSV
        #[arg(short, long, default_value = "qbs_spectrum.csv")]
        out: PathBuf,
    },
}

/// Bad input exits with 2, failures during a computation with 1.
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<qdsim::Error> for Failure {
    fn from(e: qdsim::Error) -> Self {
        match e {
            qdsim::Error::InvalidParameter { .. } | qdsim::Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    match std::env::var("OQS_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Failure::Usage(format!("OQS_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => match flag {
            Some(0) => Err(Failure::Usage("--threads must be positive".into())),
            other => Ok(other),
        },
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Numerical(e.to_string()))?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Map(io) => commands::map(&io.config, &io.out),
        Command::Synthesize(io) => commands::synthesize(&io.config, &io.out, seed),
        Command::Emulate(io) => commands::emulate(&io.config, &io.out, seed),
        Command::Sweep {
            io,
            grid,
            variant,
            ks_range,
            tc_range_uev,
        } => commands::sweep(
            &io.config,
            &io.out,
            &grid,
            &variant,
            (ks_range[0], ks_range[1]),
            (tc_range_uev[0], tc_range_uev[1]),
            seed,
        ),
        Command::Compare { target, sim, out } => commands::compare(&target, &sim, &out),
        Command::QbsSpectrum {
            design,
            kappa_ev_per_v,
            gamma,
            max_mev,
            points,
            parasitic_ff,
            out,
        } => commands::qbs_spectrum(&design, kappa_ev_per_v, gamma, max_mev, points, parasitic_ff, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
