//! Sampled complex scalar fields and intensity maps.
//!
//! Arrays are stored row-major with shape `(ny, nx)`, so `samples[[iy, ix]]`.
//! Sample `(ix, iy)` sits at `x = (ix - nx/2)·pitch`, `y = (iy - ny/2)·pitch`
//! (integer division), which puts the optical axis exactly on a sample for
//! every grid size.

use ndarray::{Array2, Zip};
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Physical metadata shared by fields and intensity maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampling<T> {
    /// Sample spacing in meters (square pixels).
    pub pitch: T,
    /// Vacuum wavelength in meters.
    pub wavelength: T,
    /// Axial position of the plane. Screen is 0, viewer side positive.
    pub plane_z: T,
}

impl<T: Real> Sampling<T> {
    pub fn new(pitch: T, wavelength: T, plane_z: T) -> Result<Self> {
        if !(pitch > T::zero() && pitch.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "pitch must be > 0, got {pitch}"
            )));
        }
        if !(wavelength > T::zero() && wavelength.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "wavelength must be > 0, got {wavelength}"
            )));
        }
        if !plane_z.is_finite() {
            return Err(Error::InvalidGrid("plane_z must be finite".into()));
        }
        Ok(Sampling {
            pitch,
            wavelength,
            plane_z,
        })
    }
}

/// Centered coordinate of sample `i` on an axis of `n` samples.
#[inline]
pub fn axis_coordinate<T: Real>(i: usize, n: usize, pitch: T) -> T {
    T::from_f64_lossy(i as f64 - (n / 2) as f64) * pitch
}

fn check_shape(nx: usize, ny: usize) -> Result<()> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidGrid(format!(
            "grid must be at least 2x2, got {nx}x{ny}"
        )));
    }
    Ok(())
}

fn check_compatible<T: Real>(
    a_shape: (usize, usize),
    a: &Sampling<T>,
    b_shape: (usize, usize),
    b: &Sampling<T>,
) -> Result<()> {
    if a_shape != b_shape {
        return Err(Error::GridMismatch(format!(
            "shape {:?} vs {:?}",
            a_shape, b_shape
        )));
    }
    if a.pitch != b.pitch {
        return Err(Error::GridMismatch(format!(
            "pitch {} vs {}",
            a.pitch, b.pitch
        )));
    }
    if a.wavelength != b.wavelength {
        return Err(Error::GridMismatch(format!(
            "wavelength {} vs {}",
            a.wavelength, b.wavelength
        )));
    }
    if a.plane_z != b.plane_z {
        return Err(Error::PlaneMismatch {
            a: a.plane_z.to_f64_lossless(),
            b: b.plane_z.to_f64_lossless(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Multiply,
}

/// Complex amplitude sampled on a square-pixel grid at one axial plane.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField<T: Real> {
    samples: Array2<Complex<T>>,
    sampling: Sampling<T>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(samples: Array2<Complex<T>>, sampling: Sampling<T>) -> Result<Self> {
        let (ny, nx) = samples.dim();
        check_shape(nx, ny)?;
        Sampling::new(sampling.pitch, sampling.wavelength, sampling.plane_z)?;
        if samples
            .iter()
            .any(|u| !(u.re.is_finite() && u.im.is_finite()))
        {
            return Err(Error::InvalidGrid(
                "field contains non-finite samples".into(),
            ));
        }
        Ok(ComplexField {
            samples: samples.as_standard_layout().into_owned(),
            sampling,
        })
    }

    pub fn zeros(nx: usize, ny: usize, sampling: Sampling<T>) -> Result<Self> {
        Self::new(Array2::zeros((ny, nx)), sampling)
    }

    /// Builds a field by evaluating `f(x, y)` at every sample position.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        sampling: Sampling<T>,
        mut f: impl FnMut(T, T) -> Complex<T>,
    ) -> Result<Self> {
        check_shape(nx, ny)?;
        let pitch = sampling.pitch;
        let samples = Array2::from_shape_fn((ny, nx), |(iy, ix)| {
            f(
                axis_coordinate(ix, nx, pitch),
                axis_coordinate(iy, ny, pitch),
            )
        });
        Self::new(samples, sampling)
    }

    /// Internal constructor for values already known to be valid.
    pub(crate) fn from_parts(samples: Array2<Complex<T>>, sampling: Sampling<T>) -> Self {
        debug_assert!(samples.is_standard_layout());
        ComplexField { samples, sampling }
    }

    /// Same metadata, new samples.
    pub fn with_samples(&self, samples: Array2<Complex<T>>) -> Result<Self> {
        if samples.dim() != self.samples.dim() {
            return Err(Error::GridMismatch(format!(
                "shape {:?} vs {:?}",
                samples.dim(),
                self.samples.dim()
            )));
        }
        Self::new(samples, self.sampling)
    }

    pub fn nx(&self) -> usize {
        self.samples.ncols()
    }

    pub fn ny(&self) -> usize {
        self.samples.nrows()
    }

    pub fn pitch(&self) -> T {
        self.sampling.pitch
    }

    pub fn wavelength(&self) -> T {
        self.sampling.wavelength
    }

    pub fn plane_z(&self) -> T {
        self.sampling.plane_z
    }

    pub fn sampling(&self) -> Sampling<T> {
        self.sampling
    }

    pub fn samples(&self) -> &Array2<Complex<T>> {
        &self.samples
    }

    pub fn into_samples(self) -> Array2<Complex<T>> {
        self.samples
    }

    pub fn x(&self, ix: usize) -> T {
        axis_coordinate(ix, self.nx(), self.pitch())
    }

    pub fn y(&self, iy: usize) -> T {
        axis_coordinate(iy, self.ny(), self.pitch())
    }

    /// Σ|u|²·pitch².
    pub fn power(&self) -> T {
        let sum = self
            .samples
            .iter()
            .fold(T::zero(), |acc, u| acc + u.norm_sqr());
        sum * self.pitch() * self.pitch()
    }

    pub fn conjugate(&self) -> Self {
        Self::from_parts(self.samples.mapv(|u| u.conj()), self.sampling)
    }

    /// Elementwise sum or product. Both operands must share grid and plane.
    pub fn combine(&self, other: &Self, op: CombineOp) -> Result<Self> {
        check_compatible(
            self.samples.dim(),
            &self.sampling,
            other.samples.dim(),
            &other.sampling,
        )?;
        let samples = match op {
            CombineOp::Add => Zip::from(&self.samples)
                .and(&other.samples)
                .map_collect(|&a, &b| a + b),
            CombineOp::Multiply => Zip::from(&self.samples)
                .and(&other.samples)
                .map_collect(|&a, &b| a * b),
        };
        Ok(Self::from_parts(samples, self.sampling))
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self::from_parts(self.samples.mapv(|u| u * factor), self.sampling)
    }

    /// Multiplies by a real array of the same shape (e.g. a transmittance).
    pub fn modulate(&self, weights: &Array2<T>) -> Result<Self> {
        if weights.dim() != self.samples.dim() {
            return Err(Error::GridMismatch(format!(
                "shape {:?} vs {:?}",
                weights.dim(),
                self.samples.dim()
            )));
        }
        let samples = Zip::from(&self.samples)
            .and(weights)
            .map_collect(|&u, &w| u * w);
        Ok(Self::from_parts(samples, self.sampling))
    }

    pub fn intensity(&self) -> IntensityMap<T> {
        IntensityMap::from_parts(self.samples.mapv(|u| u.norm_sqr()), self.sampling)
    }

    /// ‖self − other‖₂ / ‖other‖₂ over the samples. Metadata is not compared.
    pub fn relative_l2_distance(&self, other: &Self) -> Result<T> {
        if self.samples.dim() != other.samples.dim() {
            return Err(Error::GridMismatch(format!(
                "shape {:?} vs {:?}",
                self.samples.dim(),
                other.samples.dim()
            )));
        }
        let mut diff = T::zero();
        let mut norm = T::zero();
        Zip::from(&self.samples)
            .and(&other.samples)
            .for_each(|&a, &b| {
                diff = diff + (a - b).norm_sqr();
                norm = norm + b.norm_sqr();
            });
        if norm == T::zero() {
            return Ok(diff.sqrt());
        }
        Ok((diff / norm).sqrt())
    }
}

/// Non-negative real intensity sampled on the same kind of grid.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityMap<T: Real> {
    samples: Array2<T>,
    sampling: Sampling<T>,
}

impl<T: Real> IntensityMap<T> {
    pub fn new(samples: Array2<T>, sampling: Sampling<T>) -> Result<Self> {
        let (ny, nx) = samples.dim();
        check_shape(nx, ny)?;
        Sampling::new(sampling.pitch, sampling.wavelength, sampling.plane_z)?;
        if samples.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::InvalidGrid(
                "intensity samples must be finite and >= 0".into(),
            ));
        }
        Ok(IntensityMap {
            samples: samples.as_standard_layout().into_owned(),
            sampling,
        })
    }

    pub(crate) fn from_parts(samples: Array2<T>, sampling: Sampling<T>) -> Self {
        IntensityMap { samples, sampling }
    }

    pub fn nx(&self) -> usize {
        self.samples.ncols()
    }

    pub fn ny(&self) -> usize {
        self.samples.nrows()
    }

    pub fn pitch(&self) -> T {
        self.sampling.pitch
    }

    pub fn wavelength(&self) -> T {
        self.sampling.wavelength
    }

    pub fn plane_z(&self) -> T {
        self.sampling.plane_z
    }

    pub fn sampling(&self) -> Sampling<T> {
        self.sampling
    }

    pub fn samples(&self) -> &Array2<T> {
        &self.samples
    }

    pub fn into_samples(self) -> Array2<T> {
        self.samples
    }

    pub fn max(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    pub fn sum(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, &v| acc + v)
    }

    pub fn mean(&self) -> T {
        self.sum() / T::from_usize(self.samples.len()).unwrap()
    }

    /// Location and value of the brightest sample; ties resolve to the first
    /// in row-major order.
    pub fn argmax(&self) -> ((usize, usize), T) {
        let mut best = ((0, 0), T::neg_infinity());
        for ((iy, ix), &v) in self.samples.indexed_iter() {
            if v > best.1 {
                best = ((ix, iy), v);
            }
        }
        best
    }

    /// Pointwise sum of two maps on the same grid.
    pub fn accumulate(&self, other: &Self) -> Result<Self> {
        check_compatible(
            self.samples.dim(),
            &self.sampling,
            other.samples.dim(),
            &other.sampling,
        )?;
        Ok(Self::from_parts(
            &self.samples + &other.samples,
            self.sampling,
        ))
    }

    pub fn x(&self, ix: usize) -> T {
        axis_coordinate(ix, self.nx(), self.pitch())
    }

    pub fn y(&self, iy: usize) -> T {
        axis_coordinate(iy, self.ny(), self.pitch())
    }
}
