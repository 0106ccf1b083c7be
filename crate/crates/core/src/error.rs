use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not anti-Hermitian (max deviation {0:.3e})")]
    NotAntiHermitian(f64),

    #[error("matrix is not unitary (Frobenius deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("trace has non-negligible imaginary part {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
