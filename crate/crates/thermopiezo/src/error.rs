//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input in {context}")]
    NonFinite { context: &'static str },

    #[error("symmetry violation in {relation}: |{violation:.6e}| exceeds tolerance {tol:.6e} at indices {indices:?}")]
    Symmetry {
        relation: String,
        violation: f64,
        tol: f64,
        indices: Vec<usize>,
    },

    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("field {field} must have {expected} entries, found {found}")]
    WrongLength {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("relaxation coefficient beta is zero; the rate response is undefined")]
    BetaZero,

    #[error("evaluator is not quadratic: basis direction {index} deviates by {deviation:.3e}")]
    NonQuadratic { index: usize, deviation: f64 },

    #[error("initial entropy relation is degenerate: a44*beta + gamma/beta = 0")]
    DegenerateEntropyCoefficient,

    #[error("temperature equation has non-negative leading coefficient (a44 + gamma/beta^2)*beta = {value:.6e}; pass force to run anyway")]
    UnstableLeadingCoefficient { value: f64 },

    #[error("linear solver failed: {0}")]
    SolverFailure(String),

    #[error("non-finite field value detected at step {step}")]
    NanDetected { step: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
