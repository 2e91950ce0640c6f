//! Scalars for the recurrence: `f64` or exact `BigRational`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `num / den`, with `den != 0`.
    fn ratio(num: i64, den: i64) -> Self;

    fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    fn zero() -> Self {
        Self::int(0)
    }

    fn one() -> Self {
        Self::int(1)
    }

    fn as_f64(&self) -> f64;

    fn is_exact() -> bool;

    /// Bit length of the larger of numerator and denominator (0 for floats).
    fn size_bits(&self) -> u64;

    fn abs_val(&self) -> Self;
}

impl Scalar for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn is_exact() -> bool {
        false
    }

    fn size_bits(&self) -> u64 {
        0
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn as_f64(&self) -> f64 {
        // Large numerators/denominators overflow f64 on their own; scale both
        // down to ~60 significant bits first.
        let num = self.numer();
        let den = self.denom();
        let shift_n = num.bits().saturating_sub(60);
        let shift_d = den.bits().saturating_sub(60);
        let n = (num >> shift_n).to_f64().unwrap_or(f64::NAN);
        let d = (den >> shift_d).to_f64().unwrap_or(f64::NAN);
        n / d * 2f64.powi(shift_n as i32 - shift_d as i32)
    }

    fn is_exact() -> bool {
        true
    }

    fn size_bits(&self) -> u64 {
        self.numer().bits().max(self.denom().bits())
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// `p/q` rendering of an exact rational.
pub fn fraction_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}
