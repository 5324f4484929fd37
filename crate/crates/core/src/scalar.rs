//! Numeric abstraction shared by the matrix, solver and equilibrium code.
//!
//! Everything above this module is written once against [`Scalar`] and
//! instantiated for `f64` (the production path), `f32`, and exact
//! [`BigRational`] arithmetic (used by oracles and exact fixtures). Exact
//! types get a zero tolerance: a pivot is singular only when it is exactly
//! zero and a solution entry is negative only when it is strictly below zero.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Converts from `f64`. Exact types convert the binary value exactly.
    fn from_f64(v: f64) -> Self;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Absolute tolerance `rel * |scale|`; always zero for exact types.
    fn tolerance(scale: &Self, rel: f64) -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_i64(v as i64)
    }

    fn is_negligible(&self, scale: &Self, rel: f64) -> bool {
        self.abs() <= Self::tolerance(scale, rel)
    }
}

macro_rules! float_scalar {
    ($ty:ty) => {
        impl Scalar for $ty {
            fn from_f64(v: f64) -> Self {
                v as $ty
            }

            fn from_i64(v: i64) -> Self {
                v as $ty
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn tolerance(scale: &Self, rel: f64) -> Self {
                scale.abs() * rel as $ty
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite f64")
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance(_scale: &Self, _rel: f64) -> Self {
        BigRational::zero()
    }
}

/// Largest absolute value in `values`, zero for an empty slice.
pub fn max_abs<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| {
        let a = v.abs();
        if a > acc {
            a
        } else {
            acc
        }
    })
}

/// `p/q` as an exact rational.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
