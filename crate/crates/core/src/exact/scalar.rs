use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExactError;

/// An exact dyadic value `mag * 2^exp` tagged with its polynomial degree.
///
/// The weight is the degree of the value in the input coordinates: a stored
/// coordinate has weight 1, a product adds weights, and sums require equal
/// weights. Mixing degrees in a sum is always a construction bug, so it is
/// reported instead of silently accepted.
#[derive(Clone, Debug)]
pub struct ExactScalar {
    mag: BigInt,
    exp: i64,
    weight: u32,
}

impl ExactScalar {
    /// Exact zero of the given weight.
    pub fn zero(weight: u32) -> Self {
        ExactScalar {
            mag: BigInt::zero(),
            exp: 0,
            weight,
        }
    }

    /// Converts a stored coordinate. The conversion never rounds.
    pub fn from_f64(x: f64) -> Result<Self, ExactError> {
        if !x.is_finite() || x.abs() > 1.0 {
            return Err(ExactError::Domain(x));
        }
        Ok(Self::from_finite(x, 1))
    }

    pub(crate) fn from_finite(x: f64, weight: u32) -> Self {
        if x == 0.0 {
            return Self::zero(weight);
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        // Strip trailing zeros so grid-aligned inputs stay small.
        let tz = mant.trailing_zeros();
        let mut mag = BigInt::from(mant >> tz);
        if x < 0.0 {
            mag = -mag;
        }
        ExactScalar {
            mag,
            exp: exp + tz as i64,
            weight,
        }
    }

    /// Builds `mag * 2^exp` directly.
    pub fn from_parts(mag: BigInt, exp: i64, weight: u32) -> Self {
        ExactScalar { mag, exp, weight }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mag
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    /// Sign of the exact value as -1, 0 or +1.
    pub fn signum(&self) -> i8 {
        match self.mag.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        ExactScalar {
            mag: self.mag.abs(),
            exp: self.exp,
            weight: self.weight,
        }
    }

    /// The integer `value * 2^(scale * weight)`, if it is an integer.
    ///
    /// With `scale = 53` this is the fixed-point view where a unit
    /// coordinate is `2^53`.
    pub fn scaled_mag(&self, scale: u32) -> Option<BigInt> {
        if self.mag.is_zero() {
            return Some(BigInt::zero());
        }
        let shift = self.exp + i64::from(scale) * i64::from(self.weight);
        if shift >= 0 {
            Some(&self.mag << shift as usize)
        } else {
            let down = (-shift) as u64;
            if self.mag.trailing_zeros().unwrap_or(0) >= down {
                Some(&self.mag >> down as usize)
            } else {
                None
            }
        }
    }

    /// Rescales so that the exponent is `exp`. Requires `exp <= self.exp`.
    pub(crate) fn with_exponent(&self, exp: i64) -> BigInt {
        debug_assert!(exp <= self.exp || self.mag.is_zero());
        if self.mag.is_zero() {
            BigInt::zero()
        } else {
            &self.mag << (self.exp - exp) as usize
        }
    }

    /// Nearest binary64 value (the subnormal range may round twice).
    pub fn to_f64(&self) -> f64 {
        if self.mag.is_zero() {
            return 0.0;
        }
        let abs = self.mag.magnitude();
        let bits = abs.bits();
        let (top, shift) = if bits > 64 {
            let shift = bits - 64;
            let mut top = (abs >> shift as usize).to_u64().unwrap_or(u64::MAX);
            if abs.trailing_zeros().unwrap_or(0) < shift {
                top |= 1; // sticky
            }
            (top, shift as i64)
        } else {
            (abs.to_u64().unwrap_or(0), 0)
        };
        let v = scale_by_pow2(top as f64, self.exp + shift);
        if self.mag.is_negative() {
            -v
        } else {
            v
        }
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, ExactError> {
        self.combine(rhs, false)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, ExactError> {
        self.combine(rhs, true)
    }

    fn combine(&self, rhs: &Self, negate_rhs: bool) -> Result<Self, ExactError> {
        if self.weight != rhs.weight {
            return Err(ExactError::WeightMismatch {
                left: self.weight,
                right: rhs.weight,
            });
        }
        let (a, b, exp) = match self.exp.cmp(&rhs.exp) {
            Ordering::Equal => return Ok(self.aligned_sum(&self.mag, &rhs.mag, self.exp, negate_rhs)),
            Ordering::Less => (self.mag.clone(), rhs.with_exponent(self.exp), self.exp),
            Ordering::Greater => (self.with_exponent(rhs.exp), rhs.mag.clone(), rhs.exp),
        };
        Ok(self.aligned_sum(&a, &b, exp, negate_rhs))
    }

    fn aligned_sum(&self, a: &BigInt, b: &BigInt, exp: i64, negate_b: bool) -> Self {
        let mag = if negate_b { a - b } else { a + b };
        ExactScalar {
            mag,
            exp,
            weight: self.weight,
        }
    }

    /// Exact product; weights add.
    pub fn mul_exact(&self, rhs: &Self) -> Self {
        ExactScalar {
            mag: &self.mag * &rhs.mag,
            exp: self.exp + rhs.exp,
            weight: self.weight + rhs.weight,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        ExactScalar {
            mag: self.mag.clone(),
            exp: self.exp + k,
            weight: self.weight,
        }
    }

    /// Compares `|self|` with a non-negative finite `v`, exactly.
    pub fn cmp_abs_f64(&self, v: f64) -> Ordering {
        let other = Self::from_finite(v.abs(), 0);
        let exp = self.exp.min(other.exp);
        let a = if self.mag.is_zero() { BigInt::zero() } else { self.mag.abs() << (self.exp - exp) as usize };
        a.cmp(&other.with_exponent(exp))
    }

    /// Nearest binary64 value of `self / den`, or `None` if `den` is zero.
    pub fn ratio_to_f64(&self, den: &ExactScalar) -> Option<f64> {
        if den.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(0.0);
        }
        // Scale the numerator so the integer quotient carries 66+ bits; the
        // remainder only feeds the sticky bit.
        let shift = (den.mag.bits() as i64 - self.mag.bits() as i64 + 66).max(0);
        let num = &self.mag << shift as usize;
        let (q, r) = (&num / &den.mag, &num % &den.mag);
        if !r.is_zero() {
            let negative = self.mag.is_negative() != den.mag.is_negative();
            let q = (q << 1usize) + if negative { -1 } else { 1 };
            return Some(ExactScalar::from_parts(q, self.exp - den.exp - shift - 1, 0).to_f64());
        }
        Some(ExactScalar::from_parts(q, self.exp - den.exp - shift, 0).to_f64())
    }

    pub fn one(weight: u32) -> Self {
        ExactScalar {
            mag: BigInt::one(),
            exp: 0,
            weight,
        }
    }
}

/// `x * 2^k` without intermediate overflow or premature underflow.
pub(crate) fn scale_by_pow2(mut x: f64, mut k: i64) -> f64 {
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
    }
    x * 2f64.powi(k as i32)
}

impl PartialEq for ExactScalar {
    /// Value equality; weights must also agree.
    fn eq(&self, other: &Self) -> bool {
        if self.weight != other.weight {
            return false;
        }
        let exp = self.exp.min(other.exp);
        self.with_exponent(exp) == other.with_exponent(exp)
    }
}

impl Eq for ExactScalar {}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;

    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        match self.try_add(rhs) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;

    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        match self.try_sub(rhs) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;

    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        self.mul_exact(rhs)
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;

    fn neg(self) -> ExactScalar {
        ExactScalar {
            mag: -self.mag,
            exp: self.exp,
            weight: self.weight,
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{} (weight {})", self.mag, self.exp, self.weight)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(x: f64) -> ExactScalar {
        ExactScalar::from_f64(x).unwrap()
    }

    #[test]
    fn unit_and_zero() {
        assert_eq!(exact(1.0).scaled_mag(53), Some(BigInt::one() << 53));
        assert_eq!(exact(1.0).weight(), 1);
        assert!(exact(0.0).is_zero());
        assert!(exact(-0.0).is_zero());
    }

    #[test]
    fn rejects_non_finite_and_out_of_range() {
        assert_eq!(ExactScalar::from_f64(f64::NAN).unwrap_err().to_string(), "value NaN is not a finite number in [-1, 1]");
        assert!(ExactScalar::from_f64(f64::INFINITY).is_err());
        assert!(ExactScalar::from_f64(1.5).is_err());
        assert!(ExactScalar::from_f64(-1.0).is_ok());
    }

    #[test]
    fn half_plus_ulp_is_exact() {
        let x = 0.5 + 2f64.powi(-53);
        let expected = (BigInt::one() << 52) + BigInt::one();
        assert_eq!(exact(x).scaled_mag(53), Some(expected));
    }

    #[test]
    fn subnormals_convert() {
        let tiny = f64::from_bits(1);
        let v = exact(tiny);
        assert_eq!(v.exponent(), -1074);
        assert_eq!(v.to_f64(), tiny);
        assert_eq!(v.scaled_mag(53), None);
        assert!(v.scaled_mag(1074).is_some());
    }

    #[test]
    fn product_and_cancellation() {
        let h = exact(0.5);
        let q = &h * &h;
        assert_eq!(q.weight(), 2);
        assert_eq!(q.to_f64(), 0.25);
        let a = exact(0.3);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn exact_subtraction_sign() {
        let d = &exact(2f64.powi(-52)) - &exact(2f64.powi(-53));
        assert_eq!(d.signum(), 1);
        assert_eq!(d.to_f64(), 2f64.powi(-53));
    }

    #[test]
    fn weight_mismatch_is_reported() {
        let a = exact(0.5);
        let b = &a * &a;
        assert_eq!(
            a.try_add(&b),
            Err(ExactError::WeightMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    #[should_panic(expected = "cannot add values of weight 1 and 2")]
    fn operator_panics_on_mixed_weights() {
        let a = exact(0.5);
        let b = &a * &a;
        let _ = &a + &b;
    }

    #[test]
    fn exact_comparison_with_f64() {
        let x = exact(0.1);
        let sq = &x * &x;
        // 0.1 * 0.1 rounds up in binary64, so the exact square is smaller.
        assert_eq!(sq.cmp_abs_f64(0.1 * 0.1), Ordering::Less);
        assert_eq!((-sq.clone()).cmp_abs_f64(sq.to_f64() / 2.0), Ordering::Greater);
        assert_eq!(exact(-0.5).cmp_abs_f64(0.5), Ordering::Equal);
        assert_eq!(exact(0.0).cmp_abs_f64(0.0), Ordering::Equal);
    }

    #[test]
    fn ratio_is_rounded_quotient() {
        let a = exact(1.0);
        let b = exact(0.75);
        assert_eq!(a.ratio_to_f64(&b), Some(1.0 / 0.75));
        assert_eq!((-a.clone()).ratio_to_f64(&b), Some(-1.0 / 0.75));
        assert_eq!(exact(0.1).ratio_to_f64(&exact(0.3)), Some(0.1 / 0.3));
        assert_eq!(a.ratio_to_f64(&exact(0.0)), None);
    }

    #[test]
    fn to_f64_rounds_wide_values() {
        // (1 - 2^-53)^2 needs 106 bits; the hardware product is correctly rounded.
        let x = exact(1.0 - 2f64.powi(-53));
        let sq = &x * &x;
        assert_eq!(sq.to_f64(), (1.0 - 2f64.powi(-53)) * (1.0 - 2f64.powi(-53)));
    }
}
