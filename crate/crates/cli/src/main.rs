//! `spindeq`: batch verifications and propagations with JSON/CSV reports.
//!
//! Exit status is 0 when every check passes, 1 when a check fails (the failing
//! names go to stderr) and 2 for usage or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spindeq_core::case::Case;

#[derive(Parser, Debug)]
#[command(
    name = "spindeq",
    version,
    about = "Dequantization identities, spin path integrals and classical path integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that the superfield substitution maps L to the CPI Lagrangian up to a total derivative.
    VerifyDequantization(VerifyArgs),
    /// Sliced Grassmann propagator against the closed-form Pauli propagator.
    PropagateQuantum(QuantumArgs),
    /// Evolve monomials under the quantized CPI Hamiltonian and compare with the classical flow.
    PropagateClassical(ClassicalArgs),
    /// Closed-form precession on the S² orbit.
    Precession(PrecessionArgs),
    /// Dirac brackets at random non-polar states.
    CheckDirac(DiracArgs),
    /// Run every acceptance check.
    All(AllArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    case: Case,
    /// Polynomial Hamiltonian in the case's fields, e.g. "p^2/2 + q^4/4".
    #[arg(long, conflicts_with = "builtin")]
    hamiltonian: Option<String>,
    /// Named Hamiltonian; without either flag every builtin of the case is checked.
    #[arg(long)]
    builtin: Option<String>,
    /// Keep the constant γ in the orbit one-form.
    #[arg(long)]
    gamma: bool,
    /// Carry ħ as a symbol in the supertime measure.
    #[arg(long)]
    hbar: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QuantumArgs {
    /// Field components BX,BY,BZ.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0, 0.0], allow_hyphen_values = true)]
    b: Vec<f64>,
    #[arg(long = "muB", default_value_t = 1.0)]
    mu_b: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [125usize, 250, 500, 1000])]
    slices: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted range of error(n)/error(2n).
    #[arg(long, default_value_t = 1.7)]
    ratio_min: f64,
    #[arg(long, default_value_t = 2.3)]
    ratio_max: f64,
    /// Bound on the error at the finest slicing.
    #[arg(long, default_value_t = 1e-2)]
    max_error: f64,
}

#[derive(Args, Debug)]
struct ClassicalArgs {
    #[arg(long)]
    case: Case,
    /// ω = eB/mc for the Grassmann case.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long = "muB", default_value_t = 1.0)]
    mu_b: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 4)]
    truncation: u8,
    /// Bosonic Hamiltonian; defaults to the harmonic oscillator.
    #[arg(long, conflicts_with = "builtin")]
    hamiltonian: Option<String>,
    #[arg(long)]
    builtin: Option<String>,
    /// Numeric parameter values, NAME=VALUE.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Largest Fourier mode reported on the orbit.
    #[arg(long, default_value_t = 3)]
    modes: i64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PrecessionArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    theta0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi0: f64,
    #[arg(long = "muB", default_value_t = 1.0, allow_hyphen_values = true)]
    mu_b: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    t: f64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiracArgs {
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, env = "SPINDEQ_SEED", default_value_t = 20240601)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    bracket_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    so3_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AllArgs {
    #[arg(long, env = "SPINDEQ_SEED", default_value_t = 20240601)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 50)]
    fields: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{v}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::VerifyDequantization(a) => commands::verify_dequantization(a),
        Command::PropagateQuantum(a) => commands::propagate_quantum(a),
        Command::PropagateClassical(a) => commands::propagate_classical(a),
        Command::Precession(a) => commands::precession(a),
        Command::CheckDirac(a) => commands::check_dirac(a),
        Command::All(a) => commands::all(a),
    };
    match outcome {
        Ok(report) if report.passed() => ExitCode::SUCCESS,
        Ok(report) => {
            for c in report.failures() {
                eprintln!("FAILED: {} (residual {:e})", c.name, c.residual);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
