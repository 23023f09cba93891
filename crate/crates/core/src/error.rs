use crate::exactmat::Scalar;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigenvalues leave the Gaussian rationals; residual factor {residual:?} (ascending coefficients)")]
    NotInField { residual: Vec<Scalar> },
    #[error("truncated polynomials have different orders ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("constant term is zero, no reciprocal")]
    NotInvertible,
    #[error("linear coefficient is zero, no compositional inverse")]
    NotReversible,
    #[error("matrix is not upper-triangular Toeplitz")]
    NotToeplitz,
    #[error("polynomial grid violates the commutant pattern: {0}")]
    PatternViolation(String),
    #[error("first slot cannot be made full rank (best rank {best} of {n})")]
    NotFullRank { best: usize, n: usize },
    #[error("reduced pair does not commute")]
    NotCommuting,
    #[error("no block splitting found: {0}")]
    NoSplitFound(String),
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),
    #[error("rescale factor is zero")]
    ZeroScale,
    #[error("bad block profile: {0}")]
    BadProfile(String),
    #[error("tuple of {0} matrices spans more than three dimensions")]
    UnsupportedArity(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
