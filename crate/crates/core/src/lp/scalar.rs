//! Exact field arithmetic for the simplex tableau.
//!
//! [`Small`] is an `i128` rational with checked operations; the solver first
//! runs on it and restarts on [`BigRational`] if any operation overflows.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

pub(crate) trait Field: Clone + Debug + Ord {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn sign(&self) -> Ordering;
    fn add(&self, other: &Self) -> Result<Self, Overflow>;
    fn sub(&self, other: &Self) -> Result<Self, Overflow>;
    fn mul(&self, other: &Self) -> Result<Self, Overflow>;
    fn div(&self, other: &Self) -> Result<Self, Overflow>;
    fn neg(&self) -> Result<Self, Overflow>;
    fn from_big(v: &BigRational) -> Result<Self, Overflow>;
    fn to_big(&self) -> BigRational;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Small(Ratio<i128>);

impl Field for Small {
    fn zero() -> Self {
        Small(Ratio::from_integer(0))
    }

    fn one() -> Self {
        Small(Ratio::from_integer(1))
    }

    fn is_zero(&self) -> bool {
        *self.0.numer() == 0
    }

    fn sign(&self) -> Ordering {
        self.0.numer().cmp(&0)
    }

    fn add(&self, other: &Self) -> Result<Self, Overflow> {
        if other.is_zero() {
            return Ok(*self);
        }
        if self.0.is_integer() && other.0.is_integer() {
            return self.0.numer().checked_add(other.0.numer()).map(|v| Small(Ratio::from_integer(v))).ok_or(Overflow);
        }
        self.0.checked_add(&other.0).map(Small).ok_or(Overflow)
    }

    fn sub(&self, other: &Self) -> Result<Self, Overflow> {
        if other.is_zero() {
            return Ok(*self);
        }
        if self.0.is_integer() && other.0.is_integer() {
            return self.0.numer().checked_sub(other.0.numer()).map(|v| Small(Ratio::from_integer(v))).ok_or(Overflow);
        }
        self.0.checked_sub(&other.0).map(Small).ok_or(Overflow)
    }

    fn mul(&self, other: &Self) -> Result<Self, Overflow> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        if self.0.is_integer() && other.0.is_integer() {
            return self.0.numer().checked_mul(other.0.numer()).map(|v| Small(Ratio::from_integer(v))).ok_or(Overflow);
        }
        self.0.checked_mul(&other.0).map(Small).ok_or(Overflow)
    }

    fn div(&self, other: &Self) -> Result<Self, Overflow> {
        assert!(!other.is_zero(), "division by zero in simplex");
        if *other.0.numer() == 1 && other.0.is_integer() {
            return Ok(*self);
        }
        if *other.0.numer() == -1 && other.0.is_integer() {
            return self.neg();
        }
        if *other.0.numer() == i128::MIN || *self.0.numer() == i128::MIN {
            return Err(Overflow);
        }
        self.0.checked_div(&other.0).map(Small).ok_or(Overflow)
    }

    fn neg(&self) -> Result<Self, Overflow> {
        self.0
            .numer()
            .checked_neg()
            .map(|n| Small(Ratio::new_raw(n, *self.0.denom())))
            .ok_or(Overflow)
    }

    fn from_big(v: &BigRational) -> Result<Self, Overflow> {
        let n = v.numer().to_i128().ok_or(Overflow)?;
        let d = v.denom().to_i128().ok_or(Overflow)?;
        Ok(Small(Ratio::new(n, d)))
    }

    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.0.numer()), BigInt::from(*self.0.denom()))
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn sign(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    fn add(&self, other: &Self) -> Result<Self, Overflow> {
        Ok(self + other)
    }

    fn sub(&self, other: &Self) -> Result<Self, Overflow> {
        Ok(self - other)
    }

    fn mul(&self, other: &Self) -> Result<Self, Overflow> {
        Ok(self * other)
    }

    fn div(&self, other: &Self) -> Result<Self, Overflow> {
        assert!(!Zero::is_zero(other), "division by zero in simplex");
        Ok(self / other)
    }

    fn neg(&self) -> Result<Self, Overflow> {
        Ok(-self)
    }

    fn from_big(v: &BigRational) -> Result<Self, Overflow> {
        Ok(v.clone())
    }

    fn to_big(&self) -> BigRational {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_overflow_is_reported() {
        let big = Small(Ratio::from_integer(i128::MAX));
        assert_eq!(big.add(&Small::one()), Err(Overflow));
        assert_eq!(big.mul(&Small(Ratio::from_integer(2))), Err(Overflow));
        let half = Small(Ratio::new(1, 2));
        assert_eq!(half.add(&half).unwrap(), Small::one());
        assert_eq!(Small::one().div(&half).unwrap(), Small(Ratio::from_integer(2)));
    }

    #[test]
    fn conversions_round_trip() {
        let q = BigRational::new(BigInt::from(-7), BigInt::from(3));
        assert_eq!(Small::from_big(&q).unwrap().to_big(), q);
        let huge = BigRational::from_integer(BigInt::from(i128::MAX) * 4);
        assert_eq!(Small::from_big(&huge), Err(Overflow));
    }
}
