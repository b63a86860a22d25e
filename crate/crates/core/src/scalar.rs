//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the simulator can run on (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self`, rounding to nearest.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant not representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    /// Widening conversion used for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::one() / Self::two()
    }

    /// Clamps into the unit interval.
    #[inline]
    fn unit_clamp(self) -> Self {
        self.max(Self::zero()).min(Self::one())
    }

    #[inline]
    fn in_unit(self) -> bool {
        self >= Self::zero() && self <= Self::one()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Nearest integer, at least 1. Used for phase lengths, arm counts and thresholds.
pub fn round_count<S: Scalar>(x: S) -> usize {
    let r = x.round().to_usize().unwrap_or(usize::MAX);
    r.max(1)
}
