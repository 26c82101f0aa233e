//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Floating-point type a simulation can run in: `f32` or `f64`.
///
/// Phase-sensitive quantities (transfer functions, carrier phases) are
/// always evaluated in `f64` and narrowed afterwards, so `f32` runs lose
/// amplitude precision but not phase wrapping.
pub trait Real: FftNum + Float + FloatConst + Default + Display + LowerExp + Debug {
    /// Lossless for `f64`, rounding for `f32`.
    fn from_f64_lossy(x: f64) -> Self;

    fn to_f64_lossless(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }
}
