//! Scanning projector model: thin-lens conjugates, chip-travel to image-depth
//! mapping, and synthesis of the divergent object wave at the screen.
//!
//! Slices are placed directly at their image-space depths with their
//! magnified extents; the lens equations below are used for design checks
//! and for converting chip-side geometry into slices.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{axis_coordinate, CombineOp, ComplexField};
use crate::propagation::angular_spectrum_propagate;
use crate::scalar::Real;
use crate::setup::OpticalSetup;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LensSpec<T> {
    pub focal_length: T,
    pub aperture_diameter: T,
}

impl<T: Real> LensSpec<T> {
    pub fn new(focal_length: T, aperture_diameter: T) -> Result<Self> {
        if !(focal_length > T::zero() && focal_length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "focal length must be > 0, got {focal_length}"
            )));
        }
        if !(aperture_diameter > T::zero() && aperture_diameter.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "aperture diameter must be > 0, got {aperture_diameter}"
            )));
        }
        Ok(LensSpec {
            focal_length,
            aperture_diameter,
        })
    }
}

/// Chip travel, measured from the lens on the object side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanSpec<T> {
    pub chip_distance_min: T,
    pub chip_distance_max: T,
}

impl<T: Real> ScanSpec<T> {
    pub fn new(lens: &LensSpec<T>, chip_distance_min: T, chip_distance_max: T) -> Result<Self> {
        if !(lens.focal_length < chip_distance_min && chip_distance_min < chip_distance_max) {
            return Err(Error::InvalidArgument(format!(
                "need focal length {} < chip min {} < chip max {}",
                lens.focal_length, chip_distance_min, chip_distance_max
            )));
        }
        Ok(ScanSpec {
            chip_distance_min,
            chip_distance_max,
        })
    }

    /// `(near, far)` image depths reachable by this travel.
    pub fn depth_range(&self, lens: &LensSpec<T>) -> Result<(T, T)> {
        Ok((
            scan_to_depth(lens, self.chip_distance_max)?,
            scan_to_depth(lens, self.chip_distance_min)?,
        ))
    }
}

/// Image distance for an object at `object_distance`: 1/f = 1/do + 1/di.
pub fn conjugate_distance<T: Real>(lens: &LensSpec<T>, object_distance: T) -> Result<T> {
    let f = lens.focal_length;
    if object_distance == f {
        return Err(Error::AtFocus);
    }
    if object_distance < f {
        return Err(Error::VirtualImage);
    }
    Ok(T::one() / (T::one() / f - T::one() / object_distance))
}

/// Signed lateral magnification −di/do.
pub fn magnification<T: Real>(object_distance: T, image_distance: T) -> T {
    -image_distance / object_distance
}

/// Image depth produced with the chip at `chip_distance` from the lens.
pub fn scan_to_depth<T: Real>(lens: &LensSpec<T>, chip_distance: T) -> Result<T> {
    conjugate_distance(lens, chip_distance)
}

/// Chip travel needed to sweep the image between `z_near` and `z_far`:
/// f²·(1/(z_near − f) − 1/(z_far − f)).
pub fn scan_range_for_depth_interval<T: Real>(
    lens: &LensSpec<T>,
    z_near: T,
    z_far: T,
) -> Result<T> {
    let f = lens.focal_length;
    if z_near <= f {
        return Err(Error::DepthTooClose {
            depth: z_near.to_f64_lossless(),
            focal_length: f.to_f64_lossless(),
        });
    }
    if z_far < z_near {
        return Err(Error::InvalidArgument(format!(
            "z_far {z_far} is nearer than z_near {z_near}"
        )));
    }
    Ok(f * f * (T::one() / (z_near - f) - T::one() / (z_far - f)))
}

/// One projected 2D image: an intensity picture at an image-space depth.
#[derive(Clone, Debug, PartialEq)]
pub struct Slice<T> {
    /// Row-major `(rows, cols)` non-negative intensity.
    pub intensity: Array2<T>,
    /// Axial position, negative on the projector side of the screen.
    pub depth: T,
    /// Physical width covered by the image columns.
    pub extent: T,
}

impl<T: Real> Slice<T> {
    pub fn new(intensity: Array2<T>, depth: T, extent: T) -> Result<Self> {
        if intensity.is_empty() {
            return Err(Error::InvalidArgument("slice image is empty".into()));
        }
        if intensity
            .iter()
            .any(|v| !(v.is_finite() && *v >= T::zero()))
        {
            return Err(Error::InvalidArgument(
                "slice intensities must be finite and >= 0".into(),
            ));
        }
        if !(extent > T::zero() && extent.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "slice extent must be > 0, got {extent}"
            )));
        }
        if !depth.is_finite() {
            return Err(Error::InvalidArgument("slice depth must be finite".into()));
        }
        Ok(Slice {
            intensity: intensity.as_standard_layout().into_owned(),
            depth,
            extent,
        })
    }

    /// Physical height, from the extent and the image aspect ratio.
    pub fn height(&self) -> T {
        let (rows, cols) = self.intensity.dim();
        self.extent * T::from_usize(rows).unwrap() / T::from_usize(cols).unwrap()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Slice {
            intensity: self.intensity.mapv(|v| v * factor),
            ..self.clone()
        }
    }
}

/// Places a chip-plane image where the lens projects it.
///
/// The image lands at depth `-di` (projector side of the screen) with its
/// width magnified by |di/do|.
pub fn project_chip_image<T: Real>(
    lens: &LensSpec<T>,
    chip_distance: T,
    chip_width: T,
    intensity: Array2<T>,
) -> Result<Slice<T>> {
    let di = scan_to_depth(lens, chip_distance)?;
    let m = magnification(chip_distance, di);
    Slice::new(intensity, -di, chip_width * m.abs())
}

/// Ordered stack of slices, farthest (most negative depth) first.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene<T> {
    pub name: String,
    slices: Vec<Slice<T>>,
}

impl<T: Real> Scene<T> {
    pub fn new(name: impl Into<String>, slices: Vec<Slice<T>>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::InvalidArgument(
                "scene needs at least one slice".into(),
            ));
        }
        if slices.windows(2).any(|w| w[0].depth >= w[1].depth) {
            return Err(Error::InvalidArgument(
                "depths monotonic: slice depths must strictly increase".into(),
            ));
        }
        Ok(Scene {
            name: name.into(),
            slices,
        })
    }

    pub fn slices(&self) -> &[Slice<T>] {
        &self.slices
    }
}

/// Per-slice diffuser seed. Depends on the slice depth, not its index, so a
/// slice keeps its phase pattern when other slices are added or removed.
pub fn slice_seed(seed: u64, depth: f64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ depth.to_bits();
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn bilinear<T: Real>(image: &Array2<T>, u: f64, v: f64) -> T {
    let (rows, cols) = image.dim();
    let u0 = u.floor();
    let v0 = v.floor();
    let du = u - u0;
    let dv = v - v0;
    let tap = |c: f64, r: f64| -> f64 {
        if c < 0.0 || r < 0.0 || c >= cols as f64 || r >= rows as f64 {
            0.0
        } else {
            image[[r as usize, c as usize]].to_f64_lossless()
        }
    };
    let mut acc = 0.0;
    for (c, wc) in [(u0, 1.0 - du), (u0 + 1.0, du)] {
        for (r, wr) in [(v0, 1.0 - dv), (v0 + 1.0, dv)] {
            let w = wc * wr;
            if w != 0.0 {
                acc += w * tap(c, r);
            }
        }
    }
    T::from_f64_lossy(acc)
}

/// Slice intensity resampled onto the simulation grid (bilinear; zero
/// outside the image). Image pixels use the same centred convention as the
/// grid, so an image with `extent / cols == pitch` maps sample-for-sample.
pub fn resample_slice<T: Real>(slice: &Slice<T>, setup: &OpticalSetup<T>) -> Result<Array2<T>> {
    let grid = setup.grid;
    let slack = T::one() + T::from_f64_lossy(1e-12);
    if slice.extent > grid.width() * slack {
        return Err(Error::ExtentTooLarge {
            extent: slice.extent.to_f64_lossless(),
            grid: grid.width().to_f64_lossless(),
        });
    }
    if slice.height() > grid.height() * slack {
        return Err(Error::ExtentTooLarge {
            extent: slice.height().to_f64_lossless(),
            grid: grid.height().to_f64_lossless(),
        });
    }
    let (rows, cols) = slice.intensity.dim();
    let spacing = slice.extent.to_f64_lossless() / cols as f64;
    let pitch = grid.pitch.to_f64_lossless();
    let (cu, cv) = ((cols / 2) as f64, (rows / 2) as f64);
    Ok(Array2::from_shape_fn((grid.ny, grid.nx), |(iy, ix)| {
        let x: f64 = axis_coordinate(ix, grid.nx, pitch);
        let y: f64 = axis_coordinate(iy, grid.ny, pitch);
        bilinear(&slice.intensity, x / spacing + cu, y / spacing + cv)
    }))
}

/// Complex field of one slice in its own plane: amplitude √I, phase either
/// zero or a uniform random diffuser drawn from `diffuse_seed`.
pub fn synthesize_slice_field<T: Real>(
    slice: &Slice<T>,
    setup: &OpticalSetup<T>,
    diffuse_seed: u64,
) -> Result<ComplexField<T>> {
    let intensity = resample_slice(slice, setup)?;
    let samples = if setup.diffuse {
        let mut rng = ChaCha8Rng::seed_from_u64(diffuse_seed);
        let two_pi = 2.0 * std::f64::consts::PI;
        intensity.mapv(|i| {
            let phase: f64 = rng.random::<f64>() * two_pi;
            let a = i.sqrt();
            Complex::new(
                a * T::from_f64_lossy(phase.cos()),
                a * T::from_f64_lossy(phase.sin()),
            )
        })
    } else {
        intensity.mapv(|i| Complex::new(i.sqrt(), T::zero()))
    };
    ComplexField::new(samples, setup.sampling_at(slice.depth))
}

/// Each slice's contribution propagated to the screen (z = 0), in scene order.
pub fn slice_object_fields<T: Real>(
    scene: &Scene<T>,
    setup: &OpticalSetup<T>,
) -> Result<Vec<ComplexField<T>>> {
    scene
        .slices()
        .iter()
        .map(|slice| {
            if slice.depth >= T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "slice depth {} is not on the projector side (z < 0)",
                    slice.depth
                )));
            }
            let seed = slice_seed(setup.seed, slice.depth.to_f64_lossless());
            let field = synthesize_slice_field(slice, setup, seed)?;
            Ok(angular_spectrum_propagate(
                &field,
                -slice.depth,
                &setup.propagation,
            ))
        })
        .collect()
}

/// Coherent object wave O(x, y) at the screen: the ordered sum of every
/// slice's propagated field.
pub fn compose_object_field<T: Real>(
    scene: &Scene<T>,
    setup: &OpticalSetup<T>,
) -> Result<ComplexField<T>> {
    let mut fields = slice_object_fields(scene, setup)?.into_iter();
    let mut total = fields.next().expect("scene has at least one slice");
    for f in fields {
        total = total.combine(&f, CombineOp::Add)?;
    }
    Ok(total)
}
