//! Scalar-wave simulation of a hologram display that builds its image from
//! a moving-focus projector and a real-time recorded hologram screen.
//!
//! The pipeline is: image slices at several depths ([`mvs`]) are propagated
//! to the screen ([`propagation`]), interfere with a plane reference wave,
//! and the recorded fringe pattern becomes a transmittance mask ([`rtrh`]).
//! Re-illuminating the mask with the reference converges light to a real
//! image in front of the screen, which [`metrics`] locates and scores.
//!
//! Numerical types are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common `f64` choice. File formats ([`io`]) and the
//! end-to-end driver ([`pipeline`]) work in `f64`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod fft;
pub mod field;
pub mod io;
pub mod metrics;
pub mod mvs;
pub mod pipeline;
pub mod propagation;
pub mod rtrh;
pub mod scalar;
pub mod setup;

pub use error::{Error, Result};
pub use field::{CombineOp, ComplexField, IntensityMap, Sampling};
pub use metrics::ReconstructionReport;
pub use propagation::{Method, PadFactor, PropagationSpec};
pub use rtrh::{Gain, MaskMode, MaskSpec, ReferenceSpec, TransmissionMask};
pub use scalar::Real;
pub use setup::{Accumulation, GridSpec, OpticalSetup};

pub use rustfft::num_complex::Complex;

pub type Field = ComplexField<f64>;
pub type Field32 = ComplexField<f32>;
pub type Intensity = IntensityMap<f64>;
pub type Setup = OpticalSetup<f64>;
