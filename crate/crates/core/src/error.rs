use thiserror::Error;

/// Errors raised by constructors, classifiers and evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sequence window is empty")]
    EmptySequence,

    #[error("term {index} is not finite")]
    NonFinite { index: usize },

    #[error("window too short: order {needed} requested but the window ends at index {last}")]
    WindowTooShort { needed: usize, last: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("p[{index}] = {value} is not in [0, 1); the sequence would not be summable")]
    NotSummable { index: usize, value: f64 },

    #[error("value cannot be represented exactly: {0}")]
    Inexact(String),

    #[error("measure has an atom at 1; the moment sequence does not converge to zero")]
    AtomAtOne,

    #[error("malformed phi specification: {0}")]
    MalformedPhi(String),

    #[error("phi cannot be split into a summable PF part and a [0, 1]-valued part: {0}")]
    Decomposition(String),

    #[error("point {re} + {im}i lies on a branch cut of the integral model")]
    OnCut { re: f64, im: f64 },

    #[error("|x| = {modulus} is outside the region where the coefficient model is controlled (radius {radius})")]
    OutsideRadius { modulus: f64, radius: f64 },

    #[error("quadrature did not converge: achieved error estimate {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("order {n} exceeds the configured exact-delta bound {bound}")]
    ModeBoundExceeded { n: usize, bound: usize },

    #[error("phase unwrapping failed near {re} + {im}i: consecutive samples differ by at least pi/2")]
    PhaseUnwrap { re: f64, im: f64 },

    #[error("samples must have strictly increasing abscissae (violated at index {index})")]
    Unsorted { index: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
