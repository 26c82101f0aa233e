//! Hologram stage: reference wave, interferogram, screen transmittance and
//! reconstruction by re-illumination with the reference.
//!
//! With `I = |O + R|²` and transmittance `t = T + β·I`, the transmitted
//! reference expands as
//!
//! ```text
//! t·R = (T + β(|O|² + |R|²))·R  +  β·R²·O*  +  β·|R|²·O
//!        attenuated reference      real image    virtual image
//! ```
//!
//! For an on-axis reference (`R = A_r`) the last two terms reduce to
//! `β·A_r²·O*` and `β·A_r²·O`.

use ndarray::{Array2, Zip};
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{CombineOp, ComplexField, IntensityMap, Sampling};
use crate::propagation::{angular_spectrum_propagate, AngularSpectrum};
use crate::scalar::Real;
use crate::setup::OpticalSetup;

/// Uniform-amplitude plane reference wave.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceSpec<T> {
    pub amplitude: T,
    /// Plane-wave angle in the x-z plane, radians.
    pub tilt_x: T,
    /// Plane-wave angle in the y-z plane, radians.
    pub tilt_y: T,
    pub phase_offset: T,
}

impl<T: Real> ReferenceSpec<T> {
    pub fn new(amplitude: T, tilt_x: T, tilt_y: T, phase_offset: T) -> Result<Self> {
        if !(amplitude > T::zero() && amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "reference amplitude must be > 0, got {amplitude}"
            )));
        }
        for (name, tilt) in [("tilt_x", tilt_x), ("tilt_y", tilt_y)] {
            if !(tilt.abs() < T::FRAC_PI_2()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in (-π/2, π/2), got {tilt}"
                )));
            }
        }
        if !phase_offset.is_finite() {
            return Err(Error::InvalidArgument("phase offset must be finite".into()));
        }
        Ok(ReferenceSpec {
            amplitude,
            tilt_x,
            tilt_y,
            phase_offset,
        })
    }

    pub fn on_axis(amplitude: T) -> Result<Self> {
        Self::new(amplitude, T::zero(), T::zero(), T::zero())
    }

    /// Spatial carrier `(sin θx / λ, sin θy / λ)` in cycles per meter.
    pub fn carrier(&self, wavelength: T) -> (T, T) {
        (
            self.tilt_x.sin() / wavelength,
            self.tilt_y.sin() / wavelength,
        )
    }

    pub fn is_on_axis(&self) -> bool {
        self.tilt_x == T::zero() && self.tilt_y == T::zero()
    }
}

impl Default for ReferenceSpec<f64> {
    /// Unit amplitude, 1° off-axis in x. 1° stays below Nyquist at the
    /// default 8 µm pitch and 532 nm.
    fn default() -> Self {
        ReferenceSpec::new(1.0, 1f64.to_radians(), 0.0, 0.0).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskMode {
    Linear,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gain<T> {
    /// β = 1 / max(I).
    Auto,
    Fixed(T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskSpec<T> {
    /// Constant transmittance T.
    pub bias: T,
    /// Fringe gain β.
    pub gain: Gain<T>,
    pub mode: MaskMode,
    /// Binary mode: fraction of max(I) above which the screen is open.
    pub binary_threshold: T,
}

impl<T: Real> MaskSpec<T> {
    pub fn new(bias: T, gain: Gain<T>, mode: MaskMode, binary_threshold: T) -> Result<Self> {
        if !(bias >= T::zero() && bias.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bias must be >= 0, got {bias}"
            )));
        }
        if let Gain::Fixed(g) = gain {
            if !(g >= T::zero() && g.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "gain must be >= 0, got {g}"
                )));
            }
        }
        if !(binary_threshold > T::zero() && binary_threshold < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "binary threshold must lie in (0, 1), got {binary_threshold}"
            )));
        }
        Ok(MaskSpec {
            bias,
            gain,
            mode,
            binary_threshold,
        })
    }

    pub fn linear(bias: T, gain: Gain<T>) -> Result<Self> {
        Self::new(bias, gain, MaskMode::Linear, T::from_f64_lossy(0.5))
    }

    /// Gain actually applied for a given interferogram maximum.
    pub fn resolve_gain(&self, max_intensity: T) -> T {
        match self.gain {
            Gain::Fixed(g) => g,
            Gain::Auto if max_intensity > T::zero() => T::one() / max_intensity,
            Gain::Auto => T::zero(),
        }
    }
}

impl Default for MaskSpec<f64> {
    fn default() -> Self {
        MaskSpec::new(0.0, Gain::Auto, MaskMode::Linear, 0.5).unwrap()
    }
}

/// Real amplitude transmittance of the screen, every sample in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionMask<T: Real> {
    transmittance: Array2<T>,
    sampling: Sampling<T>,
    /// Largest transmittance before clamping (diagnostic).
    pub max_pre_clamp: T,
    pub gain: T,
    pub bias: T,
}

impl<T: Real> TransmissionMask<T> {
    pub fn transmittance(&self) -> &Array2<T> {
        &self.transmittance
    }

    pub fn sampling(&self) -> Sampling<T> {
        self.sampling
    }

    pub fn nx(&self) -> usize {
        self.transmittance.ncols()
    }

    pub fn ny(&self) -> usize {
        self.transmittance.nrows()
    }

    pub fn was_clamped(&self) -> bool {
        self.max_pre_clamp > T::one()
    }

    /// The transmittance as a real-valued complex field (unit illumination).
    pub fn as_field(&self) -> ComplexField<T> {
        ComplexField::from_parts(
            self.transmittance.mapv(|t| Complex::new(t, T::zero())),
            self.sampling,
        )
    }
}

/// R(x, y) = A_r·exp(i(2π/λ)(x sin θx + y sin θy) + iφ) on the screen.
pub fn reference_wave<T: Real>(
    reference: &ReferenceSpec<T>,
    setup: &OpticalSetup<T>,
) -> Result<ComplexField<T>> {
    let wavelength = setup.wavelength.to_f64_lossless();
    let pitch = setup.grid.pitch.to_f64_lossless();
    let nyquist = 1.0 / (2.0 * pitch);
    let sx = reference.tilt_x.to_f64_lossless().sin();
    let sy = reference.tilt_y.to_f64_lossless().sin();
    for s in [sx, sy] {
        let frequency = s.abs() / wavelength;
        if frequency > nyquist {
            return Err(Error::TiltAliased { frequency, nyquist });
        }
    }
    let amplitude = reference.amplitude;
    let offset = reference.phase_offset.to_f64_lossless();
    let g = setup.grid;
    let turns_x: Vec<f64> = (0..g.nx)
        .map(|ix| crate::field::axis_coordinate::<f64>(ix, g.nx, pitch) * sx / wavelength)
        .collect();
    let turns_y: Vec<f64> = (0..g.ny)
        .map(|iy| crate::field::axis_coordinate::<f64>(iy, g.ny, pitch) * sy / wavelength)
        .collect();
    let samples = Array2::from_shape_fn((g.ny, g.nx), |(iy, ix)| {
        let turns = turns_x[ix] + turns_y[iy];
        let phase = 2.0 * std::f64::consts::PI * (turns - turns.round()) + offset;
        Complex::new(
            amplitude * T::from_f64_lossy(phase.cos()),
            amplitude * T::from_f64_lossy(phase.sin()),
        )
    });
    ComplexField::new(samples, setup.screen_sampling())
}

/// I = |O + R|².
pub fn interferogram<T: Real>(
    object: &ComplexField<T>,
    reference: &ComplexField<T>,
) -> Result<IntensityMap<T>> {
    Ok(object.combine(reference, CombineOp::Add)?.intensity())
}

/// Right-hand side of I = |O|² + |R|² + 2·A_r·A_o·cos(φ_r − φ_o), term by term.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTerms<T: Real> {
    pub object: IntensityMap<T>,
    pub reference: IntensityMap<T>,
    /// 2·Re(O·R*), signed.
    pub interference: Array2<T>,
    /// I minus the three terms above; rounding-level by construction.
    pub residual: Array2<T>,
}

impl<T: Real> ExpansionTerms<T> {
    pub fn sum(&self) -> Array2<T> {
        Zip::from(self.object.samples())
            .and(self.reference.samples())
            .and(&self.interference)
            .and(&self.residual)
            .map_collect(|&o, &r, &x, &e| o + r + x + e)
    }
}

pub fn expansion_terms<T: Real>(
    object: &ComplexField<T>,
    reference: &ComplexField<T>,
) -> Result<ExpansionTerms<T>> {
    let total = interferogram(object, reference)?;
    let two = T::one() + T::one();
    let interference = Zip::from(object.samples())
        .and(reference.samples())
        .map_collect(|&o, &r| two * (o * r.conj()).re);
    let object_i = object.intensity();
    let reference_i = reference.intensity();
    let residual = Zip::from(total.samples())
        .and(object_i.samples())
        .and(reference_i.samples())
        .and(&interference)
        .map_collect(|&i, &o, &r, &x| i - (o + r + x));
    Ok(ExpansionTerms {
        object: object_i,
        reference: reference_i,
        interference,
        residual,
    })
}

/// Screen transmittance from an interferogram.
///
/// Linear: `t = clamp(T + β·I, 0, 1)`. Binary: `t = 1` where
/// `I ≥ threshold·max(I)`, otherwise `clamp(T, 0, 1)`.
pub fn transmission_mask<T: Real>(
    intensity: &IntensityMap<T>,
    spec: &MaskSpec<T>,
) -> TransmissionMask<T> {
    let max_i = intensity.max();
    let gain = spec.resolve_gain(max_i);
    let clamp = |v: T| v.max(T::zero()).min(T::one());
    let (transmittance, max_pre_clamp) = match spec.mode {
        MaskMode::Linear => (
            intensity.samples().mapv(|i| clamp(spec.bias + gain * i)),
            spec.bias + gain * max_i,
        ),
        MaskMode::Binary => {
            let cut = spec.binary_threshold * max_i;
            let closed = clamp(spec.bias);
            (
                intensity
                    .samples()
                    .mapv(|i| if i >= cut { T::one() } else { closed }),
                T::one().max(spec.bias),
            )
        }
    };
    TransmissionMask {
        transmittance,
        sampling: Sampling {
            plane_z: T::zero(),
            ..intensity.sampling()
        },
        max_pre_clamp,
        gain,
        bias: spec.bias,
    }
}

/// t·R at the screen.
pub fn transmitted_field<T: Real>(
    mask: &TransmissionMask<T>,
    reference: &ReferenceSpec<T>,
    setup: &OpticalSetup<T>,
) -> Result<ComplexField<T>> {
    let r = reference_wave(reference, setup)?;
    if r.samples().dim() != mask.transmittance.dim() {
        return Err(Error::GridMismatch(format!(
            "mask {:?} vs setup grid {:?}",
            mask.transmittance.dim(),
            r.samples().dim()
        )));
    }
    r.modulate(&mask.transmittance)
}

/// Field at `z_out > 0` behind the screen under reference illumination.
pub fn reconstruct<T: Real>(
    mask: &TransmissionMask<T>,
    reference: &ReferenceSpec<T>,
    setup: &OpticalSetup<T>,
    z_out: T,
) -> Result<ComplexField<T>> {
    if !(z_out > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "reconstruction plane must be on the viewer side (z > 0), got {z_out}"
        )));
    }
    let transmitted = transmitted_field(mask, reference, setup)?;
    Ok(angular_spectrum_propagate(
        &transmitted,
        z_out,
        &setup.propagation,
    ))
}

/// Reusable reconstruction for many output planes (one forward transform).
pub struct Reconstructor<T: Real> {
    spectrum: AngularSpectrum<T>,
}

impl<T: Real> Reconstructor<T> {
    pub fn new(
        mask: &TransmissionMask<T>,
        reference: &ReferenceSpec<T>,
        setup: &OpticalSetup<T>,
    ) -> Result<Self> {
        let transmitted = transmitted_field(mask, reference, setup)?;
        Ok(Reconstructor {
            spectrum: AngularSpectrum::new(&transmitted, &setup.propagation),
        })
    }

    pub fn at(&self, z_out: T) -> ComplexField<T> {
        self.spectrum.propagate(z_out)
    }
}

/// The three terms of the transmitted field.
#[derive(Clone, Debug, PartialEq)]
pub struct TermFields<T: Real> {
    /// (T + β(|O|² + |R|²))·R
    pub attenuated_reference: ComplexField<T>,
    /// β·R²·O*, converging to the real image.
    pub real_image: ComplexField<T>,
    /// β·|R|²·O, diverging from the virtual image.
    pub virtual_image: ComplexField<T>,
}

impl<T: Real> TermFields<T> {
    pub fn sum(&self) -> ComplexField<T> {
        self.attenuated_reference
            .combine(&self.real_image, CombineOp::Add)
            .and_then(|s| s.combine(&self.virtual_image, CombineOp::Add))
            .expect("terms share one grid")
    }
}

/// Splits (T + β·I)·R into its three terms. Only valid for the unclamped
/// linear mask and a uniform-amplitude reference.
pub fn term_fields<T: Real>(
    object: &ComplexField<T>,
    reference: &ComplexField<T>,
    spec: &MaskSpec<T>,
) -> Result<TermFields<T>> {
    if spec.mode != MaskMode::Linear {
        return Err(Error::InvalidArgument(
            "term expansion needs a linear mask".into(),
        ));
    }
    let intensity = interferogram(object, reference)?;
    let first = reference.samples()[[0, 0]].norm();
    let tolerance = first * T::from_f64_lossy(1e-9);
    if reference
        .samples()
        .iter()
        .any(|r| (r.norm() - first).abs() > tolerance)
    {
        return Err(Error::NonUniformReference);
    }
    let beta = spec.resolve_gain(intensity.max());
    let max_pre_clamp = spec.bias + beta * intensity.max();
    if max_pre_clamp > T::one() + T::from_f64_lossy(1e-12) {
        return Err(Error::ClampedRegime {
            max_transmittance: max_pre_clamp.to_f64_lossless(),
        });
    }
    let sampling = object.sampling();
    let attenuated = Zip::from(object.samples())
        .and(reference.samples())
        .map_collect(|&o, &r| r * (spec.bias + beta * (o.norm_sqr() + r.norm_sqr())));
    let real = Zip::from(object.samples())
        .and(reference.samples())
        .map_collect(|&o, &r| r * r * o.conj() * beta);
    let virt = Zip::from(object.samples())
        .and(reference.samples())
        .map_collect(|&o, &r| o * (beta * r.norm_sqr()));
    Ok(TermFields {
        attenuated_reference: ComplexField::from_parts(attenuated, sampling),
        real_image: ComplexField::from_parts(real, sampling),
        virtual_image: ComplexField::from_parts(virt, sampling),
    })
}

/// Rectangular viewing window in a plane, in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window<T> {
    pub center: (T, T),
    pub size: (T, T),
}

impl<T: Real> Window<T> {
    /// Window covering every sample of the setup grid.
    pub fn full(setup: &OpticalSetup<T>) -> Self {
        let g = setup.grid;
        let half = T::from_f64_lossy(0.5);
        let x0 = crate::field::axis_coordinate(0, g.nx, g.pitch);
        let y0 = crate::field::axis_coordinate(0, g.ny, g.pitch);
        Window {
            center: (
                x0 + (g.width() - g.pitch) * half,
                y0 + (g.height() - g.pitch) * half,
            ),
            size: (g.width(), g.height()),
        }
    }

    /// Window of `w × h` samples centred on sample `(ix, iy)`.
    pub fn pixels(setup: &OpticalSetup<T>, ix: usize, iy: usize, w: usize, h: usize) -> Self {
        let g = setup.grid;
        let half = T::from_f64_lossy(0.5);
        // Even widths centre between samples so that exactly w samples fall inside.
        let shift = |n: usize| {
            if n.is_multiple_of(2) {
                -half * g.pitch
            } else {
                T::zero()
            }
        };
        Window {
            center: (
                crate::field::axis_coordinate(ix, g.nx, g.pitch) + shift(w),
                crate::field::axis_coordinate(iy, g.ny, g.pitch) + shift(h),
            ),
            size: (
                T::from_usize(w).unwrap() * g.pitch,
                T::from_usize(h).unwrap() * g.pitch,
            ),
        }
    }

    fn contains(&self, x: T, y: T) -> bool {
        let half = T::from_f64_lossy(0.5);
        let (hx, hy) = (self.size.0 * half, self.size.1 * half);
        x >= self.center.0 - hx
            && x < self.center.0 + hx
            && y >= self.center.1 - hy
            && y < self.center.1 + hy
    }
}

/// Reconstruction at `z_window`, zeroed outside `window`.
pub fn viewing_window_field<T: Real>(
    mask: &TransmissionMask<T>,
    reference: &ReferenceSpec<T>,
    setup: &OpticalSetup<T>,
    window: &Window<T>,
    z_window: T,
) -> Result<ComplexField<T>> {
    let g = setup.grid;
    let half = T::from_f64_lossy(0.5);
    let lo_x = crate::field::axis_coordinate(0, g.nx, g.pitch) - g.pitch * half;
    let lo_y = crate::field::axis_coordinate(0, g.ny, g.pitch) - g.pitch * half;
    let (hi_x, hi_y) = (lo_x + g.width(), lo_y + g.height());
    let slack = g.pitch * T::from_f64_lossy(1e-9);
    let (wx, wy) = (window.size.0 * half, window.size.1 * half);
    if window.size.0 < T::zero()
        || window.size.1 < T::zero()
        || window.center.0 - wx < lo_x - slack
        || window.center.0 + wx > hi_x + slack
        || window.center.1 - wy < lo_y - slack
        || window.center.1 + wy > hi_y + slack
    {
        return Err(Error::WindowOutsideGrid);
    }
    let field = reconstruct(mask, reference, setup, z_window)?;
    let mut samples = field.samples().clone();
    for ((iy, ix), u) in samples.indexed_iter_mut() {
        if !window.contains(field.x(ix), field.y(iy)) {
            *u = Complex::new(T::zero(), T::zero());
        }
    }
    field.with_samples(samples)
}
