mod commands;
mod opfile;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qcert", version, about = "Numerical certification suites for qudit Bell and steering scenarios")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for stochastic optimizers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Include wall time in the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SteeringMode {
    Gi,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PovmKind {
    Hw,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RandomnessKind {
    Projective,
    Hw,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GiExpectation {
    Gi,
    NotGi,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quantum value, classical brute force and SOS residuals of the ASTA functional.
    BellVerify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Quantum value and LHS bound of a steering functional.
    SteeringVerify {
        #[arg(long, value_enum)]
        mode: SteeringMode,
        #[arg(long)]
        d: usize,
        /// Schmidt coefficients, normalized on input.
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        /// `zx` or an operator file with Alice's observables.
        #[arg(long, default_value = "zx")]
        obs: String,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Classical (LHV or LHS) bound of the functional described in a JSON scenario file.
    ClassicalBound {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Joint commutant and genuine-incompatibility report for a set of observables.
    GiCheck {
        #[arg(long)]
        obs_file: PathBuf,
        /// Number of outcomes; defaults to the matrix dimension.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_enum)]
        expect: Option<GiExpectation>,
    },
    /// Mutual unbiasedness of two bases (default: eigenbases of Z_d and X_d).
    MubCheck {
        #[arg(long)]
        d: usize,
        /// Operator file with two unitaries whose columns are the bases.
        #[arg(long)]
        bases_file: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Validity, extremality and outcome statistics of a d²-outcome POVM.
    PovmVerify {
        #[arg(long, value_enum)]
        kind: PovmKind,
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        /// Fiducial amplitudes as `re,im;re,im;...`.
        #[arg(long)]
        nu: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Guessing probability and min-entropy of a certified measurement.
    Randomness {
        #[arg(long, value_enum)]
        kind: RandomnessKind,
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Robustness bounds for a perturbed maximal-violation realization.
    Robustness {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        l: i64,
    },
    /// Self-testing residuals and canonical fidelity from a JSON scenario file.
    SelftestCheck {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Write a bundled observable set in operator-file format.
    ExportFixture {
        #[arg(long, value_enum)]
        name: FixtureName,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    /// Five-dimensional GI triple with non-GI pairs.
    GiTripleD5,
    /// Four-dimensional pair with two common invariant blocks.
    BlockPairD4,
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("QCERT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| format!("QCERT_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            return Err("QCERT_THREADS must be positive".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if let Command::ExportFixture { name } = cli.command {
        let text = commands::export_fixture(name);
        return match &cli.out {
            Some(path) => match std::fs::write(path, text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    ExitCode::from(2)
                }
            },
            None => {
                print!("{text}");
                ExitCode::SUCCESS
            }
        };
    }
    let start = Instant::now();
    let mut report = match commands::run(&cli.command, cli.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.timing {
        report.set_wall_time(start.elapsed().as_secs_f64());
    }
    let text = report.render();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
