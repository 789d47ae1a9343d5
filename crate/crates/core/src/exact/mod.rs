//! Exact arithmetic over dyadic rationals.
//!
//! Every finite binary64 value is a dyadic rational `m * 2^e`, so sums,
//! differences and products of stored coordinates can be carried out with
//! big integers and no rounding at all. [`ExactScalar`] is the carrier for
//! determinant values, [`DyadicBound`] holds the non-negative bounds produced
//! by the error analysis.

mod det;
mod dyadic;
mod scalar;

pub use det::{determinant, DetMethod};
pub use dyadic::DyadicBound;
pub use scalar::ExactScalar;

use thiserror::Error;

/// Errors raised by the exact kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("value {0} is not a finite number in [-1, 1]")]
    Domain(f64),
    #[error("cannot add values of weight {left} and {right}")]
    WeightMismatch { left: u32, right: u32 },
    #[error("matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("matrix of size {0} is too large for cofactor expansion")]
    TooLarge(usize),
}
