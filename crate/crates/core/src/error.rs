use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit subset {keep} is not contained in {total}")]
    NotASubset { keep: String, total: String },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace:.15}, expected 1")]
    BadTrace { trace: f64 },

    #[error("state coefficients are not normalized (norm² = {norm_sq:.15})")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid dephasing parameters: {0}")]
    InvalidParams(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("decomposition operators are incomplete (deviation {deviation:.3e})")]
    IncompleteKraus { deviation: f64 },

    #[error("no closed form for {0}")]
    UnsupportedPair(String),

    #[error("too few usable samples: {usable} (need {required})")]
    TooFewSamples { usable: usize, required: usize },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),

    #[error("Monte Carlo equivalence is not established for {0}")]
    EquivalenceNotEstablished(String),

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidMcConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
