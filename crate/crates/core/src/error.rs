//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants carry enough context
//! (indices, offending values) for a caller to report the problem without
//! re-deriving it, and each maps to a stable machine-readable code via
//! [`Error::code`] so the CLI can emit structured errors on stderr.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // -- geometry --------------------------------------------------------
    #[error("network has no segments")]
    EmptyNetwork,
    #[error("segment {index} has zero length after endpoint snapping")]
    DegenerateSegment { index: usize },

    // -- domains and patterns ---------------------------------------------
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("points {first} and {second} are identical in space and time")]
    DuplicatePoint { first: usize, second: usize },
    #[error("point {index} lies outside the declared domain")]
    PointOutsideDomain { index: usize },
    #[error("point {index} is {distance:.6} away from the network, beyond the snap tolerance {tolerance:.6}")]
    SnapFailure {
        index: usize,
        distance: f64,
        tolerance: f64,
    },
    #[error("operation needs at least {needed} points, pattern has {got}")]
    TooFewPoints { needed: usize, got: usize },

    // -- intensity ---------------------------------------------------------
    #[error("lambda values have length {got}, pattern has {expected} points")]
    LengthMismatch { expected: usize, got: usize },
    #[error("lambda value at index {index} is not strictly positive")]
    NonpositiveLambda { index: usize },
    #[error("{0}")]
    DomainMismatch(String),

    // -- simulation ---------------------------------------------------------
    #[error("intensity {lambda:.6} exceeds the thinning bound {bound:.6}")]
    BadBound { lambda: f64, bound: f64 },
    #[error("expected offspring per event is {ratio:.4} >= 1; the cascade would not terminate")]
    SupercriticalBranching { ratio: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    // -- fitting -------------------------------------------------------------
    #[error("formula error: {0}")]
    Formula(String),
    #[error("design matrix is rank deficient on the quadrature points")]
    RankDeficientDesign,
    #[error("IRLS failed to converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("operation requires a {expected} model, got {got}")]
    WrongKind { expected: String, got: String },
    #[error("minimum contrast optimization failed: {0}")]
    OptimFailure(String),
    #[error("operation needs at least {needed} points, pattern has {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("quadrature grid refinement failed after {doublings} doublings")]
    GridRefinementFailure { doublings: usize },

    // -- diagnostics ------------------------------------------------------
    #[error("diagnostic result has {result} entries, pattern has {pattern} points")]
    PatternMismatch { result: usize, pattern: usize },

    // -- I/O ----------------------------------------------------------------
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI's structured stderr output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyNetwork => "EmptyNetwork",
            Error::DegenerateSegment { .. } => "DegenerateSegment",
            Error::InvalidDomain(_) => "InvalidDomain",
            Error::DuplicatePoint { .. } => "DuplicatePoint",
            Error::PointOutsideDomain { .. } => "PointOutsideDomain",
            Error::SnapFailure { .. } => "SnapFailure",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::NonpositiveLambda { .. } => "NonpositiveLambda",
            Error::DomainMismatch(_) => "DomainMismatch",
            Error::BadBound { .. } => "BadBound",
            Error::SupercriticalBranching { .. } => "SupercriticalBranching",
            Error::InvalidParams(_) => "InvalidParams",
            Error::Formula(_) => "Formula",
            Error::RankDeficientDesign => "RankDeficientDesign",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::WrongKind { .. } => "WrongKind",
            Error::OptimFailure(_) => "OptimFailure",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::GridRefinementFailure { .. } => "GridRefinementFailure",
            Error::PatternMismatch { .. } => "PatternMismatch",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
            Error::Parse(_) => "Parse",
        }
    }
}
