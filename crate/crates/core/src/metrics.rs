//! Reconstruction quality measures: focus search, fidelity, diffraction-order
//! power, speckle contrast, power budget and viewing solid angle.

use std::collections::BTreeMap;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::{signed_bin, Fft2};
use crate::field::{ComplexField, IntensityMap};
use crate::rtrh::{Reconstructor, ReferenceSpec, TermFields, TransmissionMask};
use crate::scalar::Real;
use crate::setup::OpticalSetup;

/// Outcome of a depth sweep over the reconstruction volume.
#[derive(Clone, Debug, PartialEq)]
pub struct FocusResult<T> {
    pub depth: T,
    /// Lateral position of the brightest sample at `depth`, meters.
    pub xy: (T, T),
    /// Pixel indices `(ix, iy)` of that sample.
    pub pixel: (usize, usize),
    pub peak: T,
    pub peak_to_mean: T,
    /// `(z, peak intensity)` for every sampled plane.
    pub curve: Vec<(T, T)>,
}

/// `steps` evenly spaced depths from `z_min` to `z_max` inclusive.
pub fn sweep_depths<T: Real>(z_min: T, z_max: T, steps: usize) -> Result<Vec<T>> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "depth sweep needs at least 2 steps, got {steps}"
        )));
    }
    if !(z_min > T::zero() && z_max > z_min) {
        return Err(Error::InvalidArgument(format!(
            "depth range must satisfy 0 < zmin < zmax, got [{z_min}, {z_max}]"
        )));
    }
    let last = T::from_usize(steps - 1).unwrap();
    Ok((0..steps)
        .map(|i| z_min + (z_max - z_min) * T::from_usize(i).unwrap() / last)
        .collect())
}

/// Reconstructs at every sampled depth and keeps the plane whose brightest
/// sample is brightest overall. Ties resolve to the nearest plane.
pub fn focus_search<T: Real>(
    mask: &TransmissionMask<T>,
    reference: &ReferenceSpec<T>,
    setup: &OpticalSetup<T>,
    z_range: (T, T),
    steps: usize,
) -> Result<FocusResult<T>> {
    let depths = sweep_depths(z_range.0, z_range.1, steps)?;
    let recon = Reconstructor::new(mask, reference, setup)?;
    focus_over(&depths, |z| Ok(recon.at(z).intensity()))
}

/// Depth sweep over an arbitrary plane renderer.
///
/// Planes are rendered one after another: each transform is already
/// row-parallel, and a padded 2048² plane takes a quarter gigabyte.
pub fn focus_over<T: Real>(
    depths: &[T],
    mut render: impl FnMut(T) -> Result<IntensityMap<T>>,
) -> Result<FocusResult<T>> {
    if depths.is_empty() {
        return Err(Error::InvalidArgument("no depths to search".into()));
    }
    let mut curve = Vec::with_capacity(depths.len());
    let mut best: Option<(usize, (usize, usize), T)> = None;
    for (i, &z) in depths.iter().enumerate() {
        let (pixel, peak) = render(z)?.argmax();
        curve.push((z, peak));
        if best.is_none_or(|(_, _, p)| peak > p) {
            best = Some((i, pixel, peak));
        }
    }
    let (i, pixel, peak) = best.expect("depths is non-empty");
    let depth = depths[i];
    let at_focus = render(depth)?;
    let mean = at_focus.mean();
    Ok(FocusResult {
        depth,
        xy: (at_focus.x(pixel.0), at_focus.y(pixel.1)),
        pixel,
        peak,
        peak_to_mean: if mean > T::zero() {
            peak / mean
        } else {
            T::zero()
        },
        curve,
    })
}

/// Indices of interior samples strictly greater than both neighbours.
pub fn local_maxima<T: Real>(curve: &[(T, T)]) -> Vec<usize> {
    (1..curve.len().saturating_sub(1))
        .filter(|&i| curve[i].1 > curve[i - 1].1 && curve[i].1 > curve[i + 1].1)
        .collect()
}

/// Mean-subtracted normalized cross-correlation.
pub fn ncc<T: Real>(reconstructed: &IntensityMap<T>, truth: &Array2<T>) -> Result<T> {
    let a = reconstructed.samples();
    if a.dim() != truth.dim() {
        return Err(Error::GridMismatch(format!(
            "reconstruction {:?} vs ground truth {:?}",
            a.dim(),
            truth.dim()
        )));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().map(|v| v.to_f64_lossless()).sum::<f64>() / n;
    let mean_b = truth.iter().map(|v| v.to_f64_lossless()).sum::<f64>() / n;
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(truth) {
        let dx = x.to_f64_lossless() - mean_a;
        let dy = y.to_f64_lossless() - mean_b;
        ab += dx * dy;
        aa += dx * dx;
        bb += dy * dy;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(T::from_f64_lossy(
        (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0),
    ))
}

/// Power in the three diffraction orders of a plane field.
///
/// The spectrum is split into strips perpendicular to the carrier: order `k`
/// collects frequencies whose component along the carrier lies in
/// `[k·c − c/2, k·c + c/2)`. Everything else is `out_of_band`. All fractions
/// are relative to the total spectral power.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderSpectra<T> {
    pub minus: T,
    pub zero: T,
    pub plus: T,
    pub out_of_band: T,
    /// Power-weighted mean frequency of the −1 band, cycles/m.
    pub minus_centroid: (T, T),
    pub plus_centroid: (T, T),
    /// Frequency step of the spectrum along x and y, cycles/m.
    pub bin: (T, T),
}

impl<T: Real> OrderSpectra<T> {
    /// Fractions of the in-band power, ordered −1, 0, +1.
    pub fn in_band(&self) -> [T; 3] {
        let total = self.minus + self.zero + self.plus;
        if total > T::zero() {
            [self.minus / total, self.zero / total, self.plus / total]
        } else {
            [T::zero(); 3]
        }
    }
}

pub fn order_spectra<T: Real>(field: &ComplexField<T>, carrier: (T, T)) -> Result<OrderSpectra<T>> {
    let (cx, cy) = (carrier.0.to_f64_lossless(), carrier.1.to_f64_lossless());
    let c = cx.hypot(cy);
    let pitch = field.pitch().to_f64_lossless();
    let nyquist = 1.0 / (2.0 * pitch);
    if c == 0.0 || cx.abs() >= nyquist || cy.abs() >= nyquist {
        return Err(Error::CarrierAliased {
            carrier: c,
            nyquist,
        });
    }
    let (nx, ny) = (field.nx(), field.ny());
    let mut data: Vec<Complex<T>> = field.samples().iter().copied().collect();
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); data.len()];
    Fft2::new(nx, ny, FftDirection::Forward).process(&mut data, &mut scratch);
    drop(scratch);

    let (dfx, dfy) = (1.0 / (nx as f64 * pitch), 1.0 / (ny as f64 * pitch));
    let (ux, uy) = (cx / c, cy / c);
    let mut power = [0.0f64; 3];
    let mut moment = [(0.0f64, 0.0f64); 3];
    let mut total = 0.0;
    for (k, u) in data.iter().enumerate() {
        let p = u.norm_sqr().to_f64_lossless();
        total += p;
        let fx = signed_bin(k % nx, nx) as f64 * dfx;
        let fy = signed_bin(k / nx, ny) as f64 * dfy;
        let order = ((fx * ux + fy * uy) / c + 0.5).floor();
        if (-1.0..=1.0).contains(&order) {
            let band = (order + 1.0) as usize;
            power[band] += p;
            moment[band].0 += p * fx;
            moment[band].1 += p * fy;
        }
    }
    let frac = |p: f64| if total > 0.0 { p / total } else { 0.0 };
    let centroid = |b: usize| {
        if power[b] > 0.0 {
            (
                T::from_f64_lossy(moment[b].0 / power[b]),
                T::from_f64_lossy(moment[b].1 / power[b]),
            )
        } else {
            (T::zero(), T::zero())
        }
    };
    let in_band = frac(power[0] + power[1] + power[2]);
    Ok(OrderSpectra {
        minus: T::from_f64_lossy(frac(power[0])),
        zero: T::from_f64_lossy(frac(power[1])),
        plus: T::from_f64_lossy(frac(power[2])),
        out_of_band: T::from_f64_lossy(if total > 0.0 { 1.0 - in_band } else { 0.0 }),
        minus_centroid: centroid(0),
        plus_centroid: centroid(2),
        bin: (T::from_f64_lossy(dfx), T::from_f64_lossy(dfy)),
    })
}

/// Region over which speckle statistics are gathered.
#[derive(Clone, Debug, PartialEq)]
pub enum Roi {
    /// Half-open pixel rectangle `[x0, x0 + width) × [y0, y0 + height)`.
    Rect {
        x0: usize,
        y0: usize,
        width: usize,
        height: usize,
    },
    /// Per-sample selection with the intensity map's shape.
    Mask(Array2<bool>),
}

/// Standard deviation over mean of the intensity inside `roi`.
pub fn speckle_contrast<T: Real>(intensity: &IntensityMap<T>, roi: &Roi) -> Result<T> {
    let samples = intensity.samples();
    let (ny, nx) = samples.dim();
    let values: Vec<f64> = match roi {
        Roi::Rect {
            x0,
            y0,
            width,
            height,
        } => {
            let (x1, y1) = ((x0 + width).min(nx), (y0 + height).min(ny));
            let mut v = Vec::new();
            for iy in (*y0).min(y1)..y1 {
                for ix in (*x0).min(x1)..x1 {
                    v.push(samples[[iy, ix]].to_f64_lossless());
                }
            }
            v
        }
        Roi::Mask(mask) => {
            if mask.dim() != samples.dim() {
                return Err(Error::GridMismatch(format!(
                    "roi mask {:?} vs intensity {:?}",
                    mask.dim(),
                    samples.dim()
                )));
            }
            samples
                .iter()
                .zip(mask)
                .filter(|(_, &keep)| keep)
                .map(|(v, _)| v.to_f64_lossless())
                .collect()
        }
    };
    if values.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Ok(T::zero());
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(T::from_f64_lossy(var.sqrt() / mean))
}

/// Solid angle of a `w × h` rectangle seen on-axis from distance `d`.
pub fn solid_angle(width: f64, height: f64, distance: f64) -> f64 {
    let a = (width / (2.0 * distance)).atan().sin();
    let b = (height / (2.0 * distance)).atan().sin();
    4.0 * (a * b).asin()
}

/// Small-angle estimate `w·h / d²`.
pub fn solid_angle_small(width: f64, height: f64, distance: f64) -> f64 {
    width * height / (distance * distance)
}

/// Share of transmitted power carried by each term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerBudget<T> {
    pub attenuated_reference: T,
    pub real_image: T,
    pub virtual_image: T,
}

impl<T: Real> PowerBudget<T> {
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            (
                "attenuated_reference".to_string(),
                self.attenuated_reference.to_f64_lossless(),
            ),
            ("real_image".to_string(), self.real_image.to_f64_lossless()),
            (
                "virtual_image".to_string(),
                self.virtual_image.to_f64_lossless(),
            ),
        ])
    }
}

pub fn power_budget<T: Real>(terms: &TermFields<T>) -> PowerBudget<T> {
    let p = [
        terms.attenuated_reference.power(),
        terms.real_image.power(),
        terms.virtual_image.power(),
    ];
    let total = p[0] + p[1] + p[2];
    let f = |x: T| {
        if total > T::zero() {
            x / total
        } else {
            T::zero()
        }
    };
    PowerBudget {
        attenuated_reference: f(p[0]),
        real_image: f(p[1]),
        virtual_image: f(p[2]),
    }
}

/// Summary of one simulated reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    pub focus_depth: f64,
    pub focus_xy: (f64, f64),
    pub peak_intensity: f64,
    pub peak_to_mean: f64,
    /// Absent when the ground truth or reconstruction is featureless.
    pub ncc: Option<f64>,
    pub speckle_contrast: f64,
    /// Term and order shares, keyed by name (`term.real_image`, `order.plus`, …).
    pub power_fractions: BTreeMap<String, f64>,
    pub solid_angle_sr: f64,
    /// Free-form run description (seed, wavelength, grid, band rule, …).
    pub provenance: BTreeMap<String, String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Sampling;
    use crate::rtrh::{
        interferogram, reference_wave, term_fields, transmission_mask, Gain, MaskSpec,
    };
    use crate::setup::GridSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sampling(pitch: f64) -> Sampling<f64> {
        Sampling::new(pitch, 532e-9, 0.0).unwrap()
    }

    fn map(a: Array2<f64>) -> IntensityMap<f64> {
        IntensityMap::new(a, sampling(8e-6)).unwrap()
    }

    #[test]
    fn sweep_depths_are_inclusive() {
        let z = sweep_depths(0.1f64, 0.3, 41).unwrap();
        assert_eq!(z.len(), 41);
        assert_eq!(z[0], 0.1);
        assert_eq!(z[40], 0.3);
        assert!((z[20] - 0.2).abs() < 1e-15);
        assert!(sweep_depths(0.1, 0.3, 1).is_err());
        assert!(sweep_depths(-0.1, 0.3, 5).is_err());
        assert!(sweep_depths(0.3, 0.3, 5).is_err());
    }

    #[test]
    fn local_maxima_finds_interior_peaks() {
        let curve: Vec<(f64, f64)> = [1.0, 3.0, 2.0, 2.0, 5.0, 4.0]
            .iter()
            .enumerate()
            .map(|(i, v)| (i as f64, *v))
            .collect();
        assert_eq!(local_maxima(&curve), vec![1, 4]);
    }

    #[test]
    fn ncc_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Array2::from_shape_fn((32, 32), |_| rng.random::<f64>());
        assert!((ncc(&map(a.clone()), &a).unwrap() - 1.0).abs() < 1e-12);
        let neg = a.mapv(|v| 1.0 - v);
        assert!((ncc(&map(a.clone()), &neg).unwrap() + 1.0).abs() < 1e-12);
        let flat = Array2::from_elem((32, 32), 2.0);
        assert!(matches!(
            ncc(&map(flat.clone()), &a),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            ncc(&map(a.clone()), &flat),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            ncc(&map(a), &Array2::zeros((16, 16))),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn ncc_independent_maps_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Array2::from_shape_fn((256, 256), |_| rng.random::<f64>());
        let b = Array2::from_shape_fn((256, 256), |_| rng.random::<f64>());
        // Null distribution has σ = 1/256.
        assert!(ncc(&map(a), &b).unwrap().abs() < 3.0 / 256.0);
    }

    #[test]
    fn speckle_contrast_cases() {
        let flat = map(Array2::from_elem((16, 16), 4.0));
        let all = Roi::Rect {
            x0: 0,
            y0: 0,
            width: 16,
            height: 16,
        };
        assert_eq!(speckle_contrast(&flat, &all).unwrap(), 0.0);
        let empty = Roi::Rect {
            x0: 3,
            y0: 3,
            width: 0,
            height: 5,
        };
        assert!(matches!(
            speckle_contrast(&flat, &empty),
            Err(Error::EmptyRoi)
        ));
        assert!(matches!(
            speckle_contrast(&flat, &Roi::Mask(Array2::from_elem((16, 16), false))),
            Err(Error::EmptyRoi)
        ));
        // Two-level map: values 1 and 3 in equal number → σ/μ = 1/2.
        let two = map(Array2::from_shape_fn((16, 16), |(i, _)| {
            if i % 2 == 0 {
                1.0
            } else {
                3.0
            }
        }));
        assert!((speckle_contrast(&two, &all).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_intensity_has_unit_contrast() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Array2::from_shape_fn((256, 256), |_| -(1.0 - rng.random::<f64>()).ln());
        let roi = Roi::Mask(Array2::from_elem((256, 256), true));
        let c = speckle_contrast(&map(a), &roi).unwrap();
        assert!((c - 1.0).abs() < 0.02, "{c}");
    }

    #[test]
    fn solid_angle_cases() {
        // Closed form for the unit square at unit distance: 4·asin(1/5).
        let exact = 4.0 * (0.2f64).asin();
        assert!((solid_angle(1.0, 1.0, 1.0) - exact).abs() < 1e-15);
        // Independent form: 4·atan(wh / (2d·sqrt(w² + h² + 4d²))).
        let alt = 4.0 * (1.0 / (2.0 * 6f64.sqrt())).atan();
        assert!((solid_angle(1.0, 1.0, 1.0) - alt).abs() < 1e-14);
        assert_eq!(solid_angle_small(1.0, 1.0, 1.0), 1.0);
        assert_eq!(solid_angle(0.0, 0.0, 1.0), 0.0);
        let s = solid_angle(0.1, 0.1, 10.0);
        assert!((s / 1e-4 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn solid_angle_matches_quadrature() {
        // Integrate d·dA / r³ over the rectangle with the midpoint rule.
        let (w, h, d) = (0.8, 0.5, 0.7);
        let n = 1000;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = -w / 2.0 + (i as f64 + 0.5) * w / n as f64;
                let y = -h / 2.0 + (j as f64 + 0.5) * h / n as f64;
                acc += d / (x * x + y * y + d * d).powf(1.5);
            }
        }
        acc *= w * h / (n * n) as f64;
        assert!((solid_angle(w, h, d) - acc).abs() < 1e-6);
    }

    #[test]
    fn cosine_mask_orders_are_4_1_1() {
        let n = 256;
        let pitch = 4e-6;
        // Carrier on an exact bin so each order is one spectral sample.
        let c = 32.0 / (n as f64 * pitch);
        let f = ComplexField::from_fn(n, n, sampling(pitch), |x, _| {
            Complex::new(
                (1.0 + (2.0 * std::f64::consts::PI * c * x).cos()) / 2.0,
                0.0,
            )
        })
        .unwrap();
        let o = order_spectra(&f, (c, 0.0)).unwrap();
        let [m, z, p] = o.in_band();
        assert!((m - 1.0 / 6.0).abs() < 1e-12);
        assert!((z - 4.0 / 6.0).abs() < 1e-12);
        assert!((p - 1.0 / 6.0).abs() < 1e-12);
        assert!(o.out_of_band < 1e-12);
        assert!((o.plus_centroid.0 - c).abs() < 1e-6 * c);
        assert!((o.minus_centroid.0 + c).abs() < 1e-6 * c);
    }

    #[test]
    fn pure_reference_is_zero_order() {
        let f =
            ComplexField::from_fn(64, 64, sampling(8e-6), |_, _| Complex::new(0.7, 0.0)).unwrap();
        let o = order_spectra(&f, (20e3, 0.0)).unwrap();
        assert!(o.zero > 0.99);
        assert!(matches!(
            order_spectra(&f, (0.0, 0.0)),
            Err(Error::CarrierAliased { .. })
        ));
        assert!(matches!(
            order_spectra(&f, (70e3, 0.0)),
            Err(Error::CarrierAliased { .. })
        ));
    }

    #[test]
    fn power_budget_cases() {
        let setup = OpticalSetup::new(GridSpec::new(32, 32, 8e-6).unwrap(), 532e-9).unwrap();
        let r = reference_wave(&ReferenceSpec::on_axis(1.0).unwrap(), &setup).unwrap();
        let zero = ComplexField::zeros(32, 32, setup.screen_sampling()).unwrap();
        let spec = MaskSpec::linear(0.0, Gain::Auto).unwrap();
        let b = power_budget(&term_fields(&zero, &r, &spec).unwrap());
        assert_eq!(
            (b.attenuated_reference, b.real_image, b.virtual_image),
            (1.0, 0.0, 0.0)
        );

        let o = ComplexField::from_fn(32, 32, setup.screen_sampling(), |x, _| {
            Complex::from_polar(1.0, x * 3e4)
        })
        .unwrap();
        let b: PowerBudget<f64> = power_budget(&term_fields(&o, &r, &spec).unwrap());
        assert!((b.real_image - b.virtual_image).abs() < 1e-15);
        let sum = b.attenuated_reference + b.real_image + b.virtual_image;
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_mask_has_no_focus() {
        let mut setup = OpticalSetup::new(GridSpec::new(64, 64, 8e-6).unwrap(), 532e-9).unwrap();
        setup.propagation = crate::propagation::PropagationSpec::angular_spectrum(
            crate::propagation::PadFactor::ONE,
            true,
        );
        let r = ReferenceSpec::on_axis(1.0).unwrap();
        let rf = reference_wave(&r, &setup).unwrap();
        let zero = ComplexField::zeros(64, 64, setup.screen_sampling()).unwrap();
        let i = interferogram(&zero, &rf).unwrap();
        let mask = transmission_mask(&i, &MaskSpec::linear(0.5, Gain::Fixed(0.0)).unwrap());
        let f: FocusResult<f64> = focus_search(&mask, &r, &setup, (0.1, 0.3), 5).unwrap();
        assert!((f.peak_to_mean - 1.0).abs() < 0.1);
        assert_eq!(f.curve.len(), 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn speckle_contrast_is_scale_invariant(seed in any::<u64>(), k in 1u32..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Array2::from_shape_fn((16, 16), |_| rng.random::<f64>() + 0.01);
            // Powers of two scale without rounding.
            let s = 2f64.powi(k as i32);
            let roi = Roi::Mask(Array2::from_elem((16, 16), true));
            let c1 = speckle_contrast(&map(a.clone()), &roi).unwrap();
            let c2 = speckle_contrast(&map(a.mapv(|v| v * s)), &roi).unwrap();
            prop_assert_eq!(c1, c2);
        }

        #[test]
        fn order_fractions_ignore_global_phase(seed in any::<u64>(), phase in 0.0..std::f64::consts::TAU) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = ComplexField::from_fn(32, 32, sampling(8e-6), |_, _| {
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }).unwrap();
            let g = f.scale(Complex::from_polar(1.0, phase));
            let a = order_spectra(&f, (15e3, 5e3)).unwrap();
            let b = order_spectra(&g, (15e3, 5e3)).unwrap();
            for (x, y) in [(a.minus, b.minus), (a.zero, b.zero), (a.plus, b.plus), (a.out_of_band, b.out_of_band)] {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn solid_angle_small_angle_within_30_percent(w in 0.01f64..1.0, h in 0.01f64..1.0) {
            let exact = solid_angle(w, h, 1.0);
            let small = solid_angle_small(w, h, 1.0);
            prop_assert!(exact <= small);
            prop_assert!((small - exact) / exact <= 0.3);
        }
    }
}
