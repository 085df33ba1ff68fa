use thiserror::Error;

/// Errors produced by the estimator toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: non-binary attribute value {value:?} (expected 0 or 1)")]
    NonBinaryAttribute { line: usize, value: String },

    #[error("population needs at least 4 units, got {0}")]
    TooFewUnits(usize),

    #[error("y and phi have different lengths ({y} vs {phi})")]
    LengthMismatch { y: usize, phi: usize },

    #[error("degenerate proportion P={0} (attribute must be present in some but not all units)")]
    DegenerateProportion(f64),

    #[error("population mean of y is zero")]
    ZeroMean,

    #[error("non-finite y value at unit {unit}")]
    NonFiniteValue { unit: usize },

    #[error("invalid design: N={population}, n={sample} (need N >= 4 and 1 <= n < N)")]
    InvalidDesign { population: usize, sample: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("degenerate moments: C20 = 0")]
    DegenerateMoments,

    #[error("enumeration too large: C(N,n) = {count} exceeds cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("every replicate was degenerate")]
    AllDegenerate,

    #[error("too few replicates: {0} (need at least 1000)")]
    TooFewReplicates(usize),

    #[error("invalid bracket ({lo}, {hi})")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("no interior minimum in bracket: best point is boundary {at} (objective {objective})")]
    NoInteriorMinimum { at: f64, objective: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
