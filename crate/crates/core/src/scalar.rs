//! Scalar abstraction for the numeric pipeline.
//!
//! Everything downstream (signal conditioning, intensity encoding, the
//! detector, the simulator) is written against [`Real`] so the same code
//! runs in `f32` or `f64`. The crate root exports `f64` aliases, which is
//! what the command-line tools and the experiment harness use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Debug
    + Display
    + Default
    + Copy
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    ///
    /// Panics if the value is not representable, which cannot happen for
    /// the in-range constants this crate uses.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal not representable in scalar type")
    }

    /// Lossy view of the scalar as `f64`, mostly for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssignOps
        + Sum
        + Debug
        + Display
        + Default
        + Copy
        + Send
        + Sync
        + 'static
{
}
