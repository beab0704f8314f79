//! Floating-point scalar abstraction shared by every module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used throughout the crate: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi<T: Scalar>(angle: T) -> T {
    let tau = T::TAU();
    let wrapped = angle % tau;
    let wrapped = if wrapped < T::zero() { wrapped + tau } else { wrapped };
    // `x % tau + tau` can round up to exactly tau for tiny negative x.
    if wrapped >= tau {
        T::zero()
    } else {
        wrapped
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi<T: Scalar>(angle: T) -> T {
    let pi = T::PI();
    let w = wrap_two_pi(angle);
    if w > pi {
        w - T::TAU()
    } else {
        w
    }
}
