use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("extension degree {0} is outside 1..=16")]
    DegreeOutOfRange(u32),
    #[error("polynomial {poly:#x} does not have degree {k}")]
    PolynomialDegree { poly: u32, k: u32 },
    #[error("polynomial {0:#x} is reducible over GF(2)")]
    ReduciblePolynomial(u32),
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("element {value:#x} does not fit in GF(2^{k})")]
    ElementOutOfRange { value: u32, k: u32 },
    #[error("cannot parse hex element {0:?}")]
    ParseElement(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("column index {index} out of range for {cols} columns")]
    IndexOutOfRange { index: usize, cols: usize },
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid construction parameters: {0}")]
    InvalidParameters(String),
    #[error("malformed candidate: {0}")]
    MalformedCandidate(String),
    #[error("oracle work bound exceeded: {needed} candidate vectors > bound {bound}")]
    WorkBoundExceeded { needed: u128, bound: u128 },
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
