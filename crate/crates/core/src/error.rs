use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parameter count mismatch: circuit has {expected} slots, got {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error("inconsistent qubit counts in Pauli sum")]
    InconsistentQubits,
    #[error("empty Pauli sum")]
    EmptyPauliSum,
    #[error("invalid Pauli string {0:?}")]
    InvalidPauliString(String),
    #[error("degenerate metric: |<s|N|s>| = {0:e}")]
    DegenerateMetric(f64),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("ill-conditioned metric: condition estimate {condition:e} exceeds cap {cap:e}")]
    IllConditioned { condition: f64, cap: f64 },
    #[error("phase aliasing: t*|lambda| = {0} exceeds the unambiguous clock range")]
    PhaseAliasing(f64),
    #[error("beta must be nonzero")]
    ZeroBeta,
    #[error("degenerate c-norm: |(phi|phi)| = {0:e}")]
    DegenerateCNorm(f64),
    #[error("scaling angle {0} rad outside |gamma| < pi/4")]
    AngleOutOfBounds(f64),
    #[error("at least {needed} angles required, got {found}")]
    TooFewAngles { needed: usize, found: usize },
    #[error("no interior minimum of |dE/dgamma|: no resonance signal")]
    NoResonance,
    #[error("training point {point} is not bound (lowest eigenvalue {energy})")]
    UnboundTrainingPoint { point: String, energy: f64 },
    #[error("unknown trajectory {0}")]
    UnknownTrajectory(usize),
    #[error("fixture checksum mismatch for {name}: expected {expected}, got {actual}")]
    ChecksumMismatch { name: String, expected: String, actual: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input or configuration rather than by
    /// a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Singular(_)
                | Error::IllConditioned { .. }
                | Error::DegenerateMetric(_)
                | Error::DegenerateCNorm(_)
                | Error::NoResonance
                | Error::NonConvergence(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
