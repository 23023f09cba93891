//! Exact arithmetic over `Q(i)` and dense linear algebra on top of it.

mod jordan;
mod matrix;
mod roots;
mod scalar;

pub use jordan::{commutant_basis, jordan_decompose, JordanBlock, JordanSpec};
pub use matrix::Matrix;
pub use roots::{eigenvalues_in_field, poly_gcd, poly_roots_in_field, poly_roots_partial};
pub use scalar::{ParseScalarError, Scalar};

/// Shorthand for an integer scalar.
pub fn int(n: i64) -> Scalar {
    Scalar::from_int(n)
}

/// Shorthand for the rational scalar `num/den`.
pub fn rat(num: i64, den: i64) -> Scalar {
    Scalar::ratio(num, den)
}
