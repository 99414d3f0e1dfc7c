use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Ideal,
    Qpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureMatrix {
    HRes,
    NRes,
}

#[derive(Debug, Parser)]
#[command(name = "qnn-ihhl", version, about = "QNN and iterative HHL resonance workflow")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pauli decomposition of a matrix.
    Decompose {
        /// JSON file with a `matrix` of `[re, im]` rows (or the bare rows).
        input: Option<PathBuf>,
        /// Use a shipped appendix matrix instead of a file.
        #[arg(long, value_enum, conflicts_with = "input")]
        fixture: Option<FixtureMatrix>,
        /// Zero-pad to this many qubits.
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long, default_value_t = 1e-14)]
        threshold: f64,
    },
    /// Train the layered QNN on a Hamiltonian.
    QnnTrain { config: PathBuf },
    /// Statevectors of the appendix gate parameters.
    QnnState {
        /// Training point as `lambda_LN,M`; all four when absent.
        #[arg(long)]
        point: Option<String>,
    },
    /// Iterative HHL on a generalized eigenproblem.
    Ihhl {
        /// JSON file with `H` and `N`.
        problem: PathBuf,
        /// Initial vector, comma separated reals.
        #[arg(long)]
        phi0: Option<String>,
        /// Shift `β` as `re` or `re,im` (MeV).
        #[arg(long, default_value = "1")]
        beta: String,
        /// Energy tolerance (MeV).
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value_t = BackendArg::Ideal)]
        backend: BackendArg,
        #[arg(long, default_value_t = 10)]
        clock_qubits: usize,
        #[arg(long, default_value_t = 200)]
        max_iterations: usize,
    },
    /// Complex-scaling angle sweep.
    CsmSweep {
        config: PathBuf,
        /// Angles in degrees, comma separated; overrides the config.
        #[arg(long, allow_hyphen_values = true)]
        angles: Option<String>,
    },
    /// Eigenvector continuation to a complex-scaled target.
    EcRun { config: PathBuf },
    /// Appendix run from the shipped fixture.
    ReproduceAppendix,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
