//! Free-space scalar propagation between parallel planes.
//!
//! Two methods are provided:
//!
//! * angular spectrum: the field is zero-padded, transformed, multiplied by
//!   the free-space transfer function `exp(i2πz·sqrt(1/λ² − fx² − fy²))`
//!   and cropped back. Evanescent frequencies are always removed; the
//!   band limit `|f| ≤ 1/(λ·sqrt((2zΔf)² + 1))` per axis (Δf being the
//!   padded frequency step) suppresses transfer-function aliasing on long
//!   throws. Output grid equals input grid.
//! * single-transform Fresnel: one FFT between chirps. The output pitch
//!   becomes `λ|z| / (n·pitch)` and is recorded on the returned field.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::{signed_bin, Fft2};
use crate::field::{axis_coordinate, ComplexField, Sampling};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AngularSpectrum,
    Fresnel,
}

/// Zero-padding multiplier for the angular-spectrum method: 1, 2 or 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadFactor(usize);

impl PadFactor {
    pub const ONE: PadFactor = PadFactor(1);
    pub const TWO: PadFactor = PadFactor(2);
    pub const FOUR: PadFactor = PadFactor(4);

    pub fn new(factor: usize) -> Result<Self> {
        match factor {
            1 | 2 | 4 => Ok(PadFactor(factor)),
            _ => Err(Error::InvalidArgument(format!(
                "pad factor must be 1, 2 or 4, got {factor}"
            ))),
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for PadFactor {
    fn default() -> Self {
        PadFactor::TWO
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PropagationSpec {
    pub method: Method,
    pub band_limit: bool,
    pub pad_factor: PadFactor,
}

impl Default for PropagationSpec {
    fn default() -> Self {
        PropagationSpec {
            method: Method::AngularSpectrum,
            band_limit: true,
            pad_factor: PadFactor::TWO,
        }
    }
}

impl PropagationSpec {
    pub fn angular_spectrum(pad_factor: PadFactor, band_limit: bool) -> Self {
        PropagationSpec {
            method: Method::AngularSpectrum,
            band_limit,
            pad_factor,
        }
    }
}

/// Propagates by `distance` with the method selected in `spec`.
pub fn propagate<T: Real>(
    field: &ComplexField<T>,
    distance: T,
    spec: &PropagationSpec,
) -> Result<ComplexField<T>> {
    match spec.method {
        Method::AngularSpectrum => Ok(angular_spectrum_propagate(field, distance, spec)),
        Method::Fresnel => fresnel_propagate(field, distance),
    }
}

pub fn angular_spectrum_propagate<T: Real>(
    field: &ComplexField<T>,
    distance: T,
    spec: &PropagationSpec,
) -> ComplexField<T> {
    AngularSpectrum::new(field, spec).propagate(distance)
}

/// Angular-spectrum propagation by `-distance`.
pub fn back_propagate<T: Real>(
    field: &ComplexField<T>,
    distance: T,
    spec: &PropagationSpec,
) -> ComplexField<T> {
    angular_spectrum_propagate(field, -distance, spec)
}

/// Padded spectrum of a source plane, reusable for many target distances.
///
/// Focus sweeps call [`AngularSpectrum::propagate`] once per depth and pay
/// for the forward transform only once.
pub struct AngularSpectrum<T: Real> {
    spectrum: Vec<Complex<T>>,
    nx: usize,
    ny: usize,
    px: usize,
    py: usize,
    sampling: Sampling<T>,
    band_limit: bool,
    inverse: Fft2<T>,
}

impl<T: Real> AngularSpectrum<T> {
    pub fn new(field: &ComplexField<T>, spec: &PropagationSpec) -> Self {
        let (nx, ny) = (field.nx(), field.ny());
        let pad = spec.pad_factor.get();
        let (px, py) = (nx * pad, ny * pad);
        let zero = Complex::new(T::zero(), T::zero());
        let mut spectrum = vec![zero; px * py];
        let src = field.samples();
        for iy in 0..ny {
            let row = src.row(iy);
            spectrum[iy * px..iy * px + nx].copy_from_slice(row.as_slice().unwrap());
        }
        let mut scratch = vec![zero; px * py];
        Fft2::new(px, py, FftDirection::Forward).process(&mut spectrum, &mut scratch);
        AngularSpectrum {
            spectrum,
            nx,
            ny,
            px,
            py,
            sampling: field.sampling(),
            band_limit: spec.band_limit,
            inverse: Fft2::new(px, py, FftDirection::Inverse),
        }
    }

    pub fn source_plane(&self) -> T {
        self.sampling.plane_z
    }

    /// Field at `source_plane + distance`, on the source grid.
    pub fn propagate(&self, distance: T) -> ComplexField<T> {
        let (px, py) = (self.px, self.py);
        let pitch = self.sampling.pitch.to_f64_lossless();
        let wavelength = self.sampling.wavelength.to_f64_lossless();
        let z = distance.to_f64_lossless();
        let inv_l2 = 1.0 / (wavelength * wavelength);

        let freqs = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|k| signed_bin(k, n) as f64 / (n as f64 * pitch))
                .collect()
        };
        let fx = freqs(px);
        let fy = freqs(py);
        let limit = |n: usize| -> f64 {
            if self.band_limit {
                let df = 1.0 / (n as f64 * pitch);
                1.0 / (wavelength * ((2.0 * z.abs() * df).powi(2) + 1.0).sqrt())
            } else {
                f64::INFINITY
            }
        };
        let (limit_x, limit_y) = (limit(px), limit(py));

        let mut work = self.spectrum.clone();
        let zero = Complex::new(T::zero(), T::zero());
        work.par_chunks_mut(px).enumerate().for_each(|(ky, row)| {
            let fy = fy[ky];
            if fy.abs() > limit_y {
                row.fill(zero);
                return;
            }
            for (kx, u) in row.iter_mut().enumerate() {
                let fx = fx[kx];
                let arg = inv_l2 - fx * fx - fy * fy;
                if arg < 0.0 || fx.abs() > limit_x {
                    *u = zero;
                } else {
                    let phase = 2.0 * PI * z * arg.sqrt();
                    let h = Complex::new(
                        T::from_f64_lossy(phase.cos()),
                        T::from_f64_lossy(phase.sin()),
                    );
                    *u = *u * h;
                }
            }
        });

        let mut scratch = vec![zero; px * py];
        self.inverse.process(&mut work, &mut scratch);
        drop(scratch);

        let norm = T::one() / T::from_usize(px * py).unwrap();
        let samples = ndarray::Array2::from_shape_fn((self.ny, self.nx), |(iy, ix)| {
            work[iy * px + ix] * norm
        });
        let sampling = Sampling {
            plane_z: self.sampling.plane_z + distance,
            ..self.sampling
        };
        ComplexField::from_parts(samples, sampling)
    }
}

/// Output sample pitch of a single-transform Fresnel step.
pub fn fresnel_output_pitch(wavelength: f64, distance: f64, n: usize, input_pitch: f64) -> f64 {
    wavelength * distance.abs() / (n as f64 * input_pitch)
}

/// `exp(i·2π·turns)` with the integer part of `turns` removed first.
#[inline]
fn cis_turns(turns: f64) -> Complex<f64> {
    let frac = turns - turns.round();
    Complex::from_polar(1.0, 2.0 * PI * frac)
}

/// Single-transform Fresnel propagation. Requires a square grid.
pub fn fresnel_propagate<T: Real>(field: &ComplexField<T>, distance: T) -> Result<ComplexField<T>> {
    let z = distance.to_f64_lossless();
    if z == 0.0 {
        return Err(Error::ZeroDistance);
    }
    let n = field.nx();
    if field.ny() != n {
        return Err(Error::InvalidGrid(format!(
            "Fresnel transform needs a square grid, got {}x{}",
            field.nx(),
            field.ny()
        )));
    }
    let pitch = field.pitch().to_f64_lossless();
    let wavelength = field.wavelength().to_f64_lossless();
    let out_pitch = fresnel_output_pitch(wavelength, z, n, pitch);
    let center = n / 2;
    let sign = z.signum();
    let lz = wavelength * z;

    // Centering factors turn the plain DFT into one over (m - c)(j - c).
    let shift: Vec<Complex<f64>> = (0..n)
        .map(|m| cis_turns(sign * ((center * m) % n) as f64 / n as f64))
        .collect();
    let input_chirp: Vec<Complex<f64>> = (0..n)
        .map(|m| {
            let x: f64 = axis_coordinate(m, n, pitch);
            cis_turns(x * x / (2.0 * lz))
        })
        .collect();

    let zero = Complex::new(T::zero(), T::zero());
    let mut work = vec![zero; n * n];
    for ((iy, ix), u) in field.samples().indexed_iter() {
        let w = input_chirp[ix] * input_chirp[iy] * shift[ix] * shift[iy];
        let u = Complex::new(u.re.to_f64_lossless(), u.im.to_f64_lossless()) * w;
        work[iy * n + ix] = Complex::new(T::from_f64_lossy(u.re), T::from_f64_lossy(u.im));
    }
    let direction = if sign > 0.0 {
        FftDirection::Forward
    } else {
        FftDirection::Inverse
    };
    let mut scratch = vec![zero; n * n];
    Fft2::new(n, n, direction).process(&mut work, &mut scratch);
    drop(scratch);

    let constant_shift = cis_turns(-sign * ((center * center) % n) as f64 / n as f64);
    // exp(ikz) / (iλz) · pitch²
    let prefactor = cis_turns(z / wavelength) * Complex::new(0.0, -1.0) * (pitch * pitch / lz);
    let output: Vec<Complex<f64>> = (0..n)
        .map(|j| {
            let x: f64 = axis_coordinate(j, n, out_pitch);
            shift[j] * cis_turns(x * x / (2.0 * lz))
        })
        .collect();
    let global = prefactor * constant_shift * constant_shift;
    let samples = ndarray::Array2::from_shape_fn((n, n), |(iy, ix)| {
        let v = work[iy * n + ix];
        let v = Complex::new(v.re.to_f64_lossless(), v.im.to_f64_lossless())
            * output[ix]
            * output[iy]
            * global;
        Complex::new(T::from_f64_lossy(v.re), T::from_f64_lossy(v.im))
    });
    let sampling = Sampling::new(
        T::from_f64_lossy(out_pitch),
        field.wavelength(),
        field.plane_z() + distance,
    )?;
    ComplexField::new(samples, sampling)
}
