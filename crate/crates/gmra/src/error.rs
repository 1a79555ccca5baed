use thiserror::Error;

/// Errors shared across the crate.
#[derive(Error, Debug)]
pub enum Error {
    #[error("matrix is singular (det = 0)")]
    SingularMatrix,
    #[error("matrix is not expansive: eigenvalue modulus {0} <= 1")]
    NonExpansive(f64),
    #[error("preimage depth overflow: N^n = {0} exceeds cap {1}")]
    DepthOverflow(u128, u128),
    #[error("invalid interval: lo {0} >= hi {1}")]
    InvalidInterval(String, String),
    #[error("overlapping pieces at {0}")]
    OverlappingPieces(String),
    #[error("epsilon {0} out of range: must satisfy 0 < eps <= 1/100")]
    EpsilonTooLarge(f64),
    #[error("multiplicity consistency inequality violated at omega = {0}")]
    ConsistencyViolated(String),
    #[error("index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("filter support violation: {entry} nonzero at {point} outside S_{j}")]
    SupportViolation { entry: String, point: String, j: usize },
    #[error("low-pass condition violated: {entry}(0) = {value}, expected {expected}")]
    LowPassViolation { entry: String, value: String, expected: String },
    #[error("Lipschitz estimate near 0 grew beyond threshold: {0}")]
    LipschitzSuspect(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("high-pass completion failed at {point}: rank deficiency beyond tolerance")]
    CompletionFailed { point: String },
    #[error("cascade did not converge at {point}: increment {increment:e} at depth {depth}")]
    NonConvergent { point: String, increment: f64, depth: usize },
    #[error("sampling box too small: need {needed}, have {have}")]
    BoxTooSmall { needed: String, have: String },
    #[error("initial condition violated at zeta_{l}: got {got}, canonical {canonical}")]
    InitialConditionViolated { l: usize, got: String, canonical: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("rational arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
