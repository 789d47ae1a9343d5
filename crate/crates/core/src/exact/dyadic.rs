use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::scalar::scale_by_pow2;

/// A non-negative dyadic rational `mantissa * 2^exponent`, kept canonical:
/// the mantissa is odd, or zero with exponent 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicBound {
    mantissa: BigUint,
    exponent: i64,
}

impl DyadicBound {
    pub fn new(mantissa: impl Into<BigUint>, exponent: i64) -> Self {
        let mut mantissa = mantissa.into();
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        mantissa >>= tz as usize;
        DyadicBound {
            mantissa,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        DyadicBound {
            mantissa: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self::pow2(0)
    }

    pub fn pow2(exponent: i64) -> Self {
        DyadicBound {
            mantissa: BigUint::one(),
            exponent,
        }
    }

    pub fn from_u64(v: u64) -> Self {
        Self::new(v, 0)
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// `self * 2^k`.
    pub fn shifted(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        DyadicBound {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// `self / 2^k` as an integer, if it is one.
    pub fn as_multiple_of_pow2(&self, k: i64) -> Option<BigUint> {
        let e = self.exponent - k;
        if self.is_zero() {
            Some(BigUint::zero())
        } else if e >= 0 {
            Some(&self.mantissa << e as usize)
        } else {
            None
        }
    }

    /// Smallest binary64 value that is `>= self`.
    pub fn to_f64_up(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits();
        let (top, shift) = if bits > 53 {
            let shift = bits - 53;
            let mut top = (&self.mantissa >> shift as usize).to_u64().unwrap_or(0);
            // The mantissa is odd, so any dropped bits are non-zero.
            top += 1;
            (top, shift as i64)
        } else {
            (self.mantissa.to_u64().unwrap_or(0), 0)
        };
        let v = scale_by_pow2(top as f64, self.exponent + shift);
        debug_assert!(DyadicBound::from_f64_exact(v).is_none_or(|b| b >= *self));
        v
    }

    /// Nearest binary64 approximation.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits();
        if bits > 64 {
            let shift = bits - 64;
            let top = (&self.mantissa >> shift as usize).to_u64().unwrap_or(0) | 1;
            scale_by_pow2(top as f64, self.exponent + shift as i64)
        } else {
            scale_by_pow2(self.mantissa.to_u64().unwrap_or(0) as f64, self.exponent)
        }
    }

    /// Exact conversion of a non-negative finite binary64 value.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        if !x.is_finite() || x < 0.0 {
            return None;
        }
        if x == 0.0 {
            return Some(Self::zero());
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Some(Self::new(mant, exp))
    }

    /// Smallest power of two `>= self`.
    pub fn ceil_pow2(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let bits = self.mantissa.bits() as i64;
        if self.mantissa.is_one() {
            self.clone()
        } else {
            Self::pow2(self.exponent + bits)
        }
    }
}

impl Ord for DyadicBound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a DyadicBound> for &'a DyadicBound {
    type Output = DyadicBound;

    fn add(self, rhs: &DyadicBound) -> DyadicBound {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &rhs.mantissa << (rhs.exponent - e) as usize;
        DyadicBound::new(a + b, e)
    }
}

impl Add for DyadicBound {
    type Output = DyadicBound;

    fn add(self, rhs: DyadicBound) -> DyadicBound {
        &self + &rhs
    }
}

impl<'a> Mul<&'a DyadicBound> for &'a DyadicBound {
    type Output = DyadicBound;

    fn mul(self, rhs: &DyadicBound) -> DyadicBound {
        if self.is_zero() || rhs.is_zero() {
            return DyadicBound::zero();
        }
        // Product of odd mantissas is odd.
        DyadicBound {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

impl Mul for DyadicBound {
    type Output = DyadicBound;

    fn mul(self, rhs: DyadicBound) -> DyadicBound {
        &self * &rhs
    }
}

impl fmt::Display for DyadicBound {
    /// `m`, or `m.2^e` in the notation of hand-written error tables.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 || self.is_zero() {
            write!(f, "{}", self.mantissa)
        } else if self.exponent > 0 && self.exponent < 16 {
            write!(f, "{}", &self.mantissa << self.exponent as usize)
        } else if self.mantissa.is_one() {
            write!(f, "2^{}", self.exponent)
        } else {
            write!(f, "{}.2^{}", self.mantissa, self.exponent)
        }
    }
}
