pub mod cli;
pub mod constructors;
pub mod error;
pub mod genfun;
pub mod json;
pub mod phi;
pub mod quadrature;
pub mod scalar;
pub mod selftest;
pub mod sequence;
pub mod series;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar, Sign};
pub use sequence::{convolve, delta_n, FiniteSeq, IndexedRow};
