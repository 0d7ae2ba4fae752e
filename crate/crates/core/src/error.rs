use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("field size q = {0} must be at least 2")]
    FieldSizeTooSmall(u64),
    #[error("stirling2({n}, {k}) requires 1 <= k <= n")]
    StirlingRange { n: u32, k: u32 },
    #[error("precision must be a positive number of decimal digits, got {0}")]
    NonPositivePrecision(i64),
    #[error("poisson mean must be positive")]
    NonPositiveMean,
    #[error("genus {0} is outside the supported range (need g >= {1})")]
    GenusOutOfRange(u32, u32),
    #[error("K = {0} must exceed 144")]
    ExponentTooSmall(f64),
    #[error("empty range: {0}")]
    EmptyRange(String),
    #[error("empty histogram")]
    EmptyHistogram,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field of order {0} is too large for table arithmetic")]
    FieldTooLarge(u64),
    #[error("coefficient space of size {0} exceeds the enumeration guard")]
    SpaceTooLarge(u128),
    #[error("curve kind {kind} is not supported over F_{q}")]
    UnsupportedKind { kind: String, q: u64 },
    #[error("extension degree {0} is not available")]
    ExtensionUnavailable(u32),
    #[error("distribution has zero total mass")]
    ZeroMass,
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
