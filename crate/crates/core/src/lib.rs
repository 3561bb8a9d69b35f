//! Spectral moments of random banded lower Hessenberg matrices.

pub mod banded_hessenberg;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod laurent;
pub mod poly;
pub mod sampling;
pub mod scalar;
pub mod two_sided;
pub mod weyl;

pub use error::{Error, Result};
pub use laurent::TruncatedLaurent;
pub use poly::Poly;
pub use scalar::{ExactComplex, Rational, Scalar, C64};

/// Series with exact rational coefficients.
pub type ExactSeries = TruncatedLaurent<Rational>;
/// Series with double precision coefficients.
pub type FloatSeries = TruncatedLaurent<f64>;
/// Series with double precision complex coefficients.
pub type ComplexSeries = TruncatedLaurent<C64>;
