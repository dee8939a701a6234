//! Scalar abstraction for the numeric core.
//!
//! Everything downstream is generic over [`Real`], a floating-point scalar
//! with the traits the estimators need (ordering, transcendentals, conversions
//! from integer counts, thread safety for parallel reductions). `f32` and
//! `f64` both satisfy the blanket implementation; the crate root exports
//! `f64`-concrete aliases for the common case.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant to `T`. Panics only for non-finite inputs on
/// exotic scalar types, which no caller produces.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Converts a count to `T`. Counts in this crate stay far below 2^53, so the
/// conversion is exact for `f64` and merely rounded for `f32`.
#[inline]
pub fn count<T: Real>(k: usize) -> T {
    T::from_usize(k).expect("count representable in scalar type")
}

/// Sign of `x` mapped to {-1, 0, +1}; zero for ties and for NaN.
#[inline]
pub fn sgn<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(real::<f64>(0.25), 0.25);
        assert_eq!(count::<f64>(4950), 4950.0);
        assert_eq!(real::<f32>(1.5), 1.5f32);
    }

    #[test]
    fn sign_convention() {
        assert_eq!(sgn::<f64>(3.2), 1.0);
        assert_eq!(sgn::<f64>(-0.1), -1.0);
        assert_eq!(sgn::<f64>(0.0), 0.0);
        assert_eq!(sgn::<f64>(f64::NAN), 0.0);
    }
}
