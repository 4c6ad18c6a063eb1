//! Scalar abstraction for the floating-point math in this crate.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used by the metric and optimizer math.
///
/// The pipeline defaults to `f64` (see the aliases at the crate root);
/// `f32` is supported for callers that trade precision for footprint.
pub trait Real: Float + FromPrimitive + AddAssign + Sum + Debug + Send + Sync + 'static {
    /// Lossy conversion from `f64`, used for constants and integer sums.
    fn of(value: f64) -> Self;
}

impl Real for f32 {
    fn of(value: f64) -> Self {
        value as f32
    }
}

impl Real for f64 {
    fn of(value: f64) -> Self {
        value
    }
}
