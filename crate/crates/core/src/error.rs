use thiserror::Error;

/// Errors raised by the algebraic and search layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vector width {0} outside 1..=64")]
    InvalidWidth(usize),
    #[error("bits set beyond width {width}: {bits:#x}")]
    BitsBeyondWidth { width: usize, bits: u64 },
    #[error("{0} variables not supported (at most {max})", max = crate::quadspace::MAX_VARS)]
    TooManyVariables(usize),
    #[error("truth table of length {got} does not match 2^{n} = {expected}", expected = 1usize << .n)]
    TableLength { n: usize, got: usize },
    #[error("value {value:#x} at index {index} does not fit in {m} output bits")]
    ValueOutOfRange { index: usize, value: u64, m: usize },
    #[error("function is not quadratic (algebraic degree {0})")]
    NotQuadratic(usize),
    #[error("operation requires an even number of variables, got {0}")]
    OddDimension(usize),
    #[error("operation requires n = m, got n = {n}, m = {m}")]
    NotSquare { n: usize, m: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("requested dimension {requested} exceeds the Nyberg bound {bound}")]
    NybergBound { requested: usize, bound: usize },
    #[error("affine map is not invertible")]
    NotInvertible,
    #[error("differential uniformity {0} > 2")]
    NotDifferentiallyTwoUniform(u64),
    #[error(
        "ortho-derivative not unique at a = {a:#x}: orthogonal space of dimension {dim} (input is not quadratic APN)"
    )]
    OrthoDerivativeNotUnique { a: u64, dim: usize },
    #[error("estimator undefined: {0}")]
    Estimator(&'static str),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
