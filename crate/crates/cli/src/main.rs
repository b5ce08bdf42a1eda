//! `szego`: spectral transforms, flows and inverse Hankel problems from the
//! command line.
//!
//! Exit status: 0 success, 1 I/O or parse error, 2 rejected input
//! (genericity, interlacing, ...), 3 failed verification.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "szego", version, about = "Action-angle tools for the cubic Szego equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Actions and angles of a symbol.
    Spectrum {
        /// Symbol JSON: {"coeffs": [[re, im], ...]} or {"num": .., "den": ..}.
        input: PathBuf,
        /// Minimal length when expanding a rational input.
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = szego_core::hankel::DEFAULT_RANK_TOL)]
        rank_tol: f64,
        #[arg(long, default_value_t = szego_core::hankel::DEFAULT_GAP_TOL)]
        gap_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symbol, rational form and model (X, A, Y) from actions and angles.
    Reconstruct {
        /// Coordinates JSON: {"lambda", "mu", "phi", "theta"}.
        input: PathBuf,
        /// Fixed number of coefficients; by default the tail is cut at 1e-12.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a symbol; writes `<out>.csv` (or one CSV per method) and `<out>.json`.
    Evolve {
        input: PathBuf,
        #[arg(long = "t")]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Record every k-th step.
        #[arg(long, default_value_t = 10)]
        every: usize,
        /// Minimal length when expanding a rational input.
        #[arg(long, default_value_t = 64)]
        m: usize,
        /// Output prefix.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a symbol with prescribed Hankel spectra and verify it.
    HankelBuild {
        /// {"lambda", "mu", "phi", "theta"}, or {"zeta", "gamma"} with --selfadjoint.
        input: PathBuf,
        #[arg(long)]
        selfadjoint: bool,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantitative experiments.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Run a seeded verification suite and report each property.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: szego_core::suites::Suite,
        /// Overridden by the SZEGO_SEED environment variable.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of cases; defaults to the suite's own size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Beat of a perturbed Blaschke product: J_1 series and time averages.
    Instability {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        eps: f64,
        /// Horizon s; the series covers [0, s/eps].
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Also integrate (z - q)/(1 - q z) + eps directly up to this time and
        /// report the largest deviation of |J_1| from the closed form.
        #[arg(long)]
        direct: Option<f64>,
        /// Output prefix for `<out>.csv` and `<out>.json`; summary on stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Direct,
    Both,
}

fn parse_suite(s: &str) -> Result<szego_core::suites::Suite, String> {
    s.parse()
}

fn seed_override(flag: u64) -> Result<u64, error::CliError> {
    match std::env::var("SZEGO_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| error::CliError::Io(format!("SZEGO_SEED must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn run(cli: Cli) -> error::CliResult<()> {
    match cli.command {
        Command::Spectrum { input, m, rank_tol, gap_tol, out } => {
            commands::spectrum(&input, m, rank_tol, gap_tol, out.as_deref())
        }
        Command::Reconstruct { input, m, out } => commands::reconstruct(&input, m, out.as_deref()),
        Command::Evolve { input, t_end, method, dt, every, m, out } => {
            commands::evolve(&input, t_end, method, dt, every, m, &out)
        }
        Command::HankelBuild { input, selfadjoint, m, tol, out } => {
            commands::hankel_build(&input, selfadjoint, m, tol, out.as_deref())
        }
        Command::Experiment { which: Experiment::Instability { q, eps, horizon, samples, direct, out } } => {
            commands::instability(q, eps, horizon, samples, direct, out.as_deref())
        }
        Command::Verify { suite, seed, n, jobs, out } => {
            let seed = seed_override(seed)?;
            commands::verify(suite, seed, n.unwrap_or(suite.default_cases()), jobs, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    // clap would exit with 2 on bad flags, which is reserved for rejected input.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
