use thiserror::Error;

/// Errors raised by the reconstruction toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |m - m^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not a projector: {0}")]
    NotProjector(String),

    #[error("trace is {trace}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("state is not positive (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coupling strength is zero: N_AB = d/(4 sin(theta_A) sin(theta_B)) is singular")]
    ZeroStrength,

    #[error("probability {probability:e} is below -1e-9: numerical corruption")]
    NumericalCorruption { probability: f64 },

    #[error("unsupported observable pair {pair}; supported pairs: {supported}")]
    UnsupportedObservablePair { pair: String, supported: String },

    #[error("missing correlation <{pair}> for element ({j}, {k})")]
    MissingCorrelation { j: usize, k: usize, pair: String },

    #[error("projector set is rank deficient (pivot {pivot:e})")]
    RankDeficient { pivot: f64 },

    #[error("trace of the Hermitian part is {trace:e}; cannot normalize")]
    NearZeroTrace { trace: f64 },

    #[error("error bound undefined: {0}")]
    BoundUndefined(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid state spec '{spec}': {reason}")]
    StateSpec { spec: String, reason: String },

    #[error("malformed matrix data at line {line}: {reason}")]
    MatrixFormat { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
