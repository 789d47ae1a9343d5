use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Ambient dimension of a predicate, between 1 and 6.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Dim(u8);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("dimension {0} is outside [1, 6]")]
pub struct DimError(pub usize);

impl Dim {
    pub const MAX: usize = 6;

    pub fn new(d: usize) -> Result<Self, DimError> {
        if (1..=Self::MAX).contains(&d) {
            Ok(Dim(d as u8))
        } else {
            Err(DimError(d))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = Dim> {
        (1..=Self::MAX).map(|d| Dim(d as u8))
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Floating-point format used by the fast path. Serializes as its
/// significand width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "u32")]
pub enum Precision {
    /// binary64, 53-bit significand.
    Double,
    /// binary32, 24-bit significand. Inputs are rounded to binary32 first.
    Single,
}

impl Precision {
    pub fn mantissa_bits(self) -> u32 {
        match self {
            Precision::Double => 53,
            Precision::Single => 24,
        }
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            53 => Some(Precision::Double),
            24 => Some(Precision::Single),
            _ => None,
        }
    }

    /// Rounds a coordinate to this format.
    pub fn round(self, x: f64) -> f64 {
        match self {
            Precision::Double => x,
            Precision::Single => f64::from(x as f32),
        }
    }
}

impl From<Precision> for u32 {
    fn from(p: Precision) -> u32 {
        p.mantissa_bits()
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mantissa_bits())
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<u32>()
            .ok()
            .and_then(Precision::from_bits)
            .ok_or_else(|| format!("precision must be 53 or 24, got '{s}'"))
    }
}

/// Which determinant a filter or expression graph refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateKind {
    /// `|p_1 ... p_d|`, d points.
    Orientation,
    /// The lifted determinant of d + 1 points, sphere through the origin.
    Insphere,
}

impl PredicateKind {
    /// Number of points the predicate takes in dimension `dim`.
    pub fn arity(self, dim: Dim) -> usize {
        match self {
            PredicateKind::Orientation => dim.get(),
            PredicateKind::Insphere => dim.get() + 1,
        }
    }
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredicateKind::Orientation => "orientation",
            PredicateKind::Insphere => "insphere",
        })
    }
}
