//! Scalar abstractions.
//!
//! Counting code (slice sums, pivot counts, Shapley-distribution masses) only
//! needs a field and is generic over [`Field`], so it can run on exact
//! rationals as well as floats. Everything touching `sqrt`, `exp` or the
//! normal cdf needs [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// A number type that supports exact field arithmetic and conversion from
/// machine integers.
pub trait Field: Num + FromPrimitive + Clone + Debug {}

impl<T> Field for T where T: Num + FromPrimitive + Clone + Debug {}

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative tolerance used when comparing against grid multiples.
    fn grid_tolerance() -> Self;
}

impl Real for f32 {
    fn grid_tolerance() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn grid_tolerance() -> Self {
        1e-9
    }
}

/// Lossless-enough conversion of an `f64` literal into `T`.
#[inline]
pub fn lit<T: FromPrimitive>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Conversion of an integer count into `T`.
#[inline]
pub fn count<T: FromPrimitive>(x: i128) -> T {
    T::from_i128(x).expect("count representable in scalar type")
}
