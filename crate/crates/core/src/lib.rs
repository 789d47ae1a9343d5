//! Statically filtered exact geometric predicates.
//!
//! The orientation and insphere tests are evaluated in floating point and
//! certified against a static error threshold derived mechanically from the
//! expression DAG; uncertain cases fall back to exact dyadic arithmetic.

pub mod bounds;
pub mod cli;
pub mod dim;
pub mod engine;
pub mod exact;
pub mod mc;
pub mod predicates;

pub use bounds::Domain;
pub use dim::{Dim, DimError, PredicateKind, Precision};
pub use predicates::{Certificate, Point, PredicateResult, Sign, StaticFilter};
