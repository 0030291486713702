use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: expected {expected} qubits, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (phase i^{phase})")]
    NotHermitian { phase: u8 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("position {position} out of range for a {width}-site operation on {n} sites")]
    PositionOutOfRange { position: usize, width: usize, n: usize },

    #[error("forced outcome {forced} conflicts with deterministic outcome {actual}")]
    ForcedOutcomeConflict { forced: i8, actual: i8 },

    #[error("measurement branch has vanishing probability ({0:e})")]
    ZeroProbabilityBranch(f64),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("qubit count {n} exceeds the dense-state cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },

    #[error("invalid circuit spec: {0}")]
    InvalidSpec(String),

    #[error("engine does not support gate family {0}")]
    UnsupportedGateFamily(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("tableau invariant violated: {0}")]
    TableauInvariant(String),

    #[error("observer failed: {0}")]
    Observer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
