//! Scalar abstraction shared by the rate, simulation and limit-law code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type used for rates, times and probabilities.
///
/// Implemented for `f32` and `f64`. Everything that needs exact arithmetic
/// (interval endpoints, population counts) is kept in integers instead.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for constants and RNG draws.
    fn of(x: f64) -> Self;

    /// Lossless-enough conversion of a count.
    fn count(n: u64) -> Self {
        Self::of(n as f64)
    }

    fn as_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}
