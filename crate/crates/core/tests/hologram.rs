//! Physical checks of recording, reconstruction and the quality measures,
//! on grids small enough to run in seconds.

use holosim::metrics::{
    focus_search, local_maxima, order_spectra, power_budget, speckle_contrast, Roi,
};
use holosim::mvs::{compose_object_field, Scene, Slice};
use holosim::propagation::{angular_spectrum_propagate, PropagationSpec};
use holosim::rtrh::{
    expansion_terms, interferogram, reference_wave, term_fields, transmission_mask,
    viewing_window_field, MaskMode, Window,
};
use holosim::{
    Complex, ComplexField, Field, Gain, GridSpec, MaskSpec, OpticalSetup, ReferenceSpec, Setup,
};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const LAMBDA: f64 = 532e-9;

fn setup(n: usize, pitch: f64) -> Setup {
    let mut s = OpticalSetup::new(GridSpec::new(n, n, pitch).unwrap(), LAMBDA).unwrap();
    s.diffuse = false;
    s
}

/// Single bright sample at pixel offset `(dx, dy)` from the grid centre.
fn point_slice(s: &Setup, depth: f64, dx: i64, dy: i64) -> Slice<f64> {
    let side = 2 * (dx.abs().max(dy.abs()) as usize) + 1;
    let mut img = Array2::zeros((side, side));
    let c = (side / 2) as i64;
    img[[(c + dy) as usize, (c + dx) as usize]] = 1.0;
    Slice::new(img, depth, side as f64 * s.grid.pitch).unwrap()
}

fn object(s: &Setup, slices: Vec<Slice<f64>>) -> Field {
    compose_object_field(&Scene::new("test", slices).unwrap(), s).unwrap()
}

fn peak_to_mean(f: &Field) -> f64 {
    let i = f.intensity();
    i.max() / i.mean()
}

fn on_axis(a: f64) -> ReferenceSpec<f64> {
    ReferenceSpec::on_axis(a).unwrap()
}

#[test]
fn interferogram_expansion_holds_for_random_fields() {
    let s = setup(64, 8e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let mut random = || {
            ComplexField::from_fn(64, 64, s.screen_sampling(), |_, _| {
                Complex::from_polar(rng.random_range(0.0..2.0), rng.random_range(0.0..2.0 * PI))
            })
            .unwrap()
        };
        let (o, r) = (random(), random());
        let i = interferogram(&o, &r).unwrap();
        let t = expansion_terms(&o, &r).unwrap();
        // Oracle: |O|² + |R|² + 2·A_r·A_o·cos(φ_r − φ_o), written out in polar form.
        for ((idx, v), total) in i.samples().indexed_iter().zip(t.sum().iter()) {
            let (oa, op) = o.samples()[idx].to_polar();
            let (ra, rp) = r.samples()[idx].to_polar();
            let oracle = oa * oa + ra * ra + 2.0 * ra * oa * (rp - op).cos();
            // Cancellation near dark fringes: scale by the largest attainable value.
            let scale = (oa + ra).powi(2);
            assert!((v - oracle).abs() <= 1e-12 * scale);
            assert!((total - v).abs() <= 1e-12 * scale);
        }
    }
}

/// Azimuthally averaged profile in 1-pixel radius bins about sample `(c, c)`.
fn radial_profile(i: &Array2<f64>, c: usize, bins: usize) -> Vec<f64> {
    let (mut sum, mut count) = (vec![0.0; bins], vec![0.0; bins]);
    for ((iy, ix), v) in i.indexed_iter() {
        let r = (ix as f64 - c as f64).hypot(iy as f64 - c as f64).round() as usize;
        if r < bins {
            sum[r] += v;
            count[r] += 1.0;
        }
    }
    sum.iter().zip(&count).map(|(s, n)| s / n).collect()
}

/// Radius in pixels of the first bright ring: the brightest bin between the
/// first and second dark fringes, refined with a parabola through its neighbours.
fn first_ring(profile: &[f64]) -> f64 {
    let dark = 0.25 * profile[0];
    let start = profile.iter().position(|&v| v < dark).unwrap();
    let bright = start + profile[start..].iter().position(|&v| v > dark).unwrap();
    let end = bright + profile[bright..].iter().position(|&v| v < dark).unwrap();
    let k = (bright..end)
        .max_by(|&a, &b| profile[a].total_cmp(&profile[b]))
        .unwrap();
    let (a, b, c) = (profile[k - 1], profile[k], profile[k + 1]);
    k as f64 + 0.5 * (a - c) / (a - 2.0 * b + c)
}

#[test]
fn zone_plate_first_bright_ring() {
    // Point source 0.2 m behind the screen; reference phase matched to the
    // object phase on axis so the centre is a bright zone.
    let s = setup(512, 4e-6);
    let z = 0.2;
    let o = object(&s, vec![point_slice(&s, -z, 0, 0)]);
    let c = 256;
    let phase = o.samples()[[c, c]].arg();
    let amp = o.samples()[[c, c]].norm();
    let r = reference_wave(&ReferenceSpec::new(amp, 0.0, 0.0, phase).unwrap(), &s).unwrap();
    let i = interferogram(&o, &r).unwrap();
    // Azimuthal averaging suppresses the small non-radial ripple left by
    // the square spectral cutoff.
    let measured = first_ring(&radial_profile(i.samples(), c, 200)) * s.grid.pitch;
    let oracle = (2.0 * LAMBDA * z).sqrt();
    assert!(
        (measured - oracle).abs() <= s.grid.pitch,
        "{measured} vs {oracle}"
    );
}

#[test]
fn real_image_converges_and_virtual_image_diverges() {
    let s = setup(512, 4e-6);
    let o = object(&s, vec![point_slice(&s, -0.2, 0, 0)]);
    let r = reference_wave(&on_axis(1e-3), &s).unwrap();
    let spec = MaskSpec::linear(0.0, Gain::Auto).unwrap();
    let terms = term_fields(&o, &r, &spec).unwrap();
    let p = &s.propagation;
    let real = angular_spectrum_propagate(&terms.real_image, 0.2, p);
    let virt = angular_spectrum_propagate(&terms.virtual_image, 0.2, p);
    assert!(peak_to_mean(&real) > 50.0);
    assert!(peak_to_mean(&virt) < 5.0);
    let ((ix, iy), _) = real.intensity().argmax();
    assert_eq!((ix, iy), (256, 256));

    // Conjugating the object swaps which term forms the converging image.
    let swapped = term_fields(&o.conjugate(), &r, &spec).unwrap();
    let real = angular_spectrum_propagate(&swapped.real_image, 0.2, p);
    let virt = angular_spectrum_propagate(&swapped.virtual_image, 0.2, p);
    assert!(peak_to_mean(&real) < 5.0);
    assert!(peak_to_mean(&virt) > 50.0);
    let back = angular_spectrum_propagate(&swapped.real_image, -0.2, p);
    assert!(peak_to_mean(&back) > 50.0);
}

#[test]
fn power_budget_sums_to_one_for_point_source() {
    let s = setup(256, 4e-6);
    let o = object(&s, vec![point_slice(&s, -0.1, 0, 0)]);
    let r = reference_wave(&on_axis(1e-3), &s).unwrap();
    let b = power_budget(&term_fields(&o, &r, &MaskSpec::default()).unwrap());
    let sum = b.attenuated_reference + b.real_image + b.virtual_image;
    assert!((sum - 1.0).abs() < 1e-12);
    assert!((b.real_image - b.virtual_image).abs() < 1e-12);
}

#[test]
fn focus_search_finds_point_and_follows_it_sideways() {
    let s = setup(256, 4e-6);
    let reference = on_axis(1e-3);
    let r = reference_wave(&reference, &s).unwrap();
    let run = |dx: i64, dy: i64| {
        let o = object(&s, vec![point_slice(&s, -0.05, dx, dy)]);
        let mask = transmission_mask(&interferogram(&o, &r).unwrap(), &MaskSpec::default());
        focus_search(&mask, &reference, &s, (0.03, 0.07), 21).unwrap()
    };
    let centre = run(0, 0);
    assert!((centre.depth - 0.05).abs() <= 0.002 + 1e-12);
    assert_eq!(centre.pixel, (128, 128));
    let moved = run(5, -3);
    assert!((moved.depth - 0.05).abs() <= 0.002 + 1e-12);
    let shift = (
        moved.pixel.0 as i64 - centre.pixel.0 as i64,
        moved.pixel.1 as i64 - centre.pixel.1 as i64,
    );
    assert!(
        (shift.0 - 5).abs() <= 1 && (shift.1 + 3).abs() <= 1,
        "{shift:?}"
    );
}

#[test]
fn two_points_give_two_depth_maxima() {
    let s = setup(512, 4e-6);
    let reference = on_axis(1e-3);
    let o = object(
        &s,
        vec![point_slice(&s, -0.25, 0, 0), point_slice(&s, -0.15, 0, 0)],
    );
    let r = reference_wave(&reference, &s).unwrap();
    let mask = transmission_mask(&interferogram(&o, &r).unwrap(), &MaskSpec::default());
    let f = focus_search(&mask, &reference, &s, (0.1, 0.3), 41).unwrap();
    let peaks: Vec<f64> = local_maxima(&f.curve)
        .iter()
        .map(|&i| f.curve[i].0)
        .collect();
    let step = 0.005 + 1e-12;
    assert!(peaks.iter().any(|z| (z - 0.15).abs() <= step), "{peaks:?}");
    assert!(peaks.iter().any(|z| (z - 0.25).abs() <= step), "{peaks:?}");
}

#[test]
fn off_axis_orders_sit_at_the_carrier() {
    let s = setup(512, 4e-6);
    let tilt = 2f64.to_radians();
    let o = object(&s, vec![point_slice(&s, -0.2, 0, 0)]);
    let amp = o.samples()[[256, 256]].norm();
    let reference = ReferenceSpec::new(amp, tilt, 0.0, 0.0).unwrap();
    let carrier = reference.carrier(LAMBDA);
    assert!((carrier.0 - tilt.sin() / LAMBDA).abs() < 1e-9);
    let r = reference_wave(&reference, &s).unwrap();
    let mask = transmission_mask(&interferogram(&o, &r).unwrap(), &MaskSpec::default());
    let orders = order_spectra(&mask.as_field(), carrier).unwrap();
    assert!(orders.minus > 0.05 && orders.plus > 0.05);
    let bin = orders.bin.0;
    assert!((orders.plus_centroid.0 - carrier.0).abs() <= bin);
    assert!((orders.minus_centroid.0 + carrier.0).abs() <= bin);

    // The reference alone has its spectrum at one frequency bin.
    let spectrum_peak = order_spectra(&r, carrier).unwrap();
    assert!(spectrum_peak.plus > 0.99);
    assert!((spectrum_peak.plus_centroid.0 - carrier.0).abs() <= bin);
}

#[test]
fn tilted_reference_separates_the_three_terms() {
    // Object built from plane waves within |f| ≤ B, carrier c = 4B, all on
    // exact frequency bins.
    let n = 256;
    let pitch = 4e-6;
    let s = setup(n, pitch);
    let df = 1.0 / (n as f64 * pitch);
    let b_bins = 6i64;
    let c_bins = 24.0;
    let tilt = (c_bins * df * LAMBDA).asin();
    let r = reference_wave(&ReferenceSpec::new(1.0, tilt, 0.0, 0.0).unwrap(), &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let modes: Vec<(f64, f64, Complex<f64>)> = (0..12)
        .map(|_| {
            (
                rng.random_range(-b_bins..=b_bins) as f64 * df,
                rng.random_range(-b_bins..=b_bins) as f64 * df,
                Complex::from_polar(0.02, rng.random_range(0.0..2.0 * PI)),
            )
        })
        .collect();
    let o = ComplexField::from_fn(n, n, s.screen_sampling(), |x, y| {
        modes
            .iter()
            .map(|(fx, fy, a)| a * Complex::from_polar(1.0, 2.0 * PI * (fx * x + fy * y)))
            .sum()
    })
    .unwrap();
    let terms = term_fields(&o, &r, &MaskSpec::default()).unwrap();
    let b = b_bins as f64 * df;
    let c = c_bins * df;
    // Spectral support of each term along fx, measured on the DFT.
    let support = |f: &Field| -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let total = f.power();
        for kx in 0..n {
            let fx = if kx < n / 2 {
                kx as f64
            } else {
                kx as f64 - n as f64
            } * df;
            let mut p = 0.0;
            for row in f.samples().rows() {
                let mut acc = Complex::new(0.0, 0.0);
                for (ix, u) in row.iter().enumerate() {
                    acc += u * Complex::from_polar(1.0, -2.0 * PI * (kx * ix) as f64 / n as f64);
                }
                p += acc.norm_sqr();
            }
            if p * pitch * pitch / (n as f64) > 1e-12 * total {
                lo = lo.min(fx);
                hi = hi.max(fx);
            }
        }
        (lo, hi)
    };
    let tol = df * 0.5;
    let (lo, hi) = support(&terms.attenuated_reference);
    assert!(
        lo >= c - 2.0 * b - tol && hi <= c + 2.0 * b + tol,
        "{lo} {hi}"
    );
    let (lo, hi) = support(&terms.real_image);
    assert!(
        lo >= 2.0 * c - b - tol && hi <= 2.0 * c + b + tol,
        "{lo} {hi}"
    );
    let (lo, hi) = support(&terms.virtual_image);
    assert!(lo >= -b - tol && hi <= b + tol, "{lo} {hi}");
}

#[test]
fn focused_real_image_fills_a_small_window() {
    // 1024² at 4 µm from 0.1 m: diffraction-limited spot about 3 px wide.
    let s = setup(1024, 4e-6);
    let o = object(&s, vec![point_slice(&s, -0.1, 0, 0)]);
    let reference = on_axis(1e-3);
    let r = reference_wave(&reference, &s).unwrap();
    let terms = term_fields(&o, &r, &MaskSpec::default()).unwrap();
    let focused = angular_spectrum_propagate(&terms.real_image, 0.1, &s.propagation);
    let ((ix, iy), _) = focused.intensity().argmax();
    let window = Window::pixels(&s, ix, iy, 10, 10);
    let mut inside = 0.0;
    for ((y, x), u) in focused.samples().indexed_iter() {
        if x + 5 >= ix && x < ix + 5 && y + 5 >= iy && y < iy + 5 {
            inside += u.norm_sqr();
        }
    }
    let total: f64 = focused.samples().iter().map(|u| u.norm_sqr()).sum();
    assert!(inside / total > 0.5, "{}", inside / total);

    // The window on the full reconstruction keeps the focus and little else.
    let mask = transmission_mask(&interferogram(&o, &r).unwrap(), &MaskSpec::default());
    let w = viewing_window_field(&mask, &reference, &s, &window, 0.1).unwrap();
    assert_eq!(w.samples().iter().filter(|u| u.norm() > 0.0).count(), 100);
    assert_eq!(w.intensity().argmax().0, (ix, iy));
}

#[test]
fn speckle_from_diffuse_object_exceeds_smooth_object() {
    let mut s = setup(256, 4e-6);
    s.propagation = PropagationSpec::default();
    let slice = Slice::new(Array2::from_elem((64, 64), 1.0), -0.05, 64.0 * 4e-6 * 2.0).unwrap();
    let r = reference_wave(&on_axis(1.0), &s).unwrap();
    let mut contrast = |diffuse: bool| {
        s.diffuse = diffuse;
        let o = object(&s, vec![slice.clone()]);
        let terms = term_fields(&o, &r, &MaskSpec::default()).unwrap();
        let img = angular_spectrum_propagate(&terms.real_image, 0.05, &s.propagation).intensity();
        // Central 96 x 96 of the 128 x 128 support.
        let roi = Roi::Rect {
            x0: 80,
            y0: 80,
            width: 96,
            height: 96,
        };
        speckle_contrast(&img, &roi).unwrap()
    };
    let rough = contrast(true);
    let smooth = contrast(false);
    assert!(smooth < 0.3, "{smooth}");
    assert!(rough > 0.6, "{rough}");
}

fn random_field(s: &Setup, n: usize, seed: u64, max_amp: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_fn(n, n, s.screen_sampling(), |_, _| {
        Complex::from_polar(
            rng.random_range(0.0..max_amp),
            rng.random_range(0.0..2.0 * PI),
        )
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mask_stays_in_unit_range(seed in any::<u64>(), bias in 0.0..2.0f64, gain in 0.0..10.0f64,
                                binary in any::<bool>(), threshold in 0.01..0.99f64, auto in any::<bool>()) {
        let s = setup(16, 8e-6);
        let o = random_field(&s, 16, seed, 3.0);
        let r = random_field(&s, 16, seed ^ 1, 3.0);
        let mode = if binary { MaskMode::Binary } else { MaskMode::Linear };
        let gain = if auto { Gain::Auto } else { Gain::Fixed(gain) };
        let spec = MaskSpec::new(bias, gain, mode, threshold).unwrap();
        let mask = transmission_mask(&interferogram(&o, &r).unwrap(), &spec);
        prop_assert!(mask.transmittance().iter().all(|t| (0.0..=1.0).contains(t)));
    }

    #[test]
    fn transmitted_field_is_the_sum_of_its_terms(seed in any::<u64>(), bias in 0.0..0.3f64,
                                                 amp in 0.1..2.0f64, tilt in -1.0..1.0f64) {
        let s = setup(32, 4e-6);
        let o = random_field(&s, 32, seed, 1.0);
        let reference = ReferenceSpec::new(amp, tilt.to_radians(), 0.0, 0.0).unwrap();
        let r = reference_wave(&reference, &s).unwrap();
        let i = interferogram(&o, &r).unwrap();
        // Gain that keeps T + β·max(I) just below one.
        let spec = MaskSpec::linear(bias, Gain::Fixed(0.999 * (1.0 - bias) / i.max())).unwrap();
        let mask = transmission_mask(&i, &spec);
        prop_assert!(!mask.was_clamped());
        let sum = term_fields(&o, &r, &spec).unwrap().sum();
        let scale = amp * (bias + (1.0 - bias));
        for (a, (t, rv)) in sum.samples().iter().zip(mask.transmittance().iter().zip(r.samples())) {
            prop_assert!((a - rv * *t).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn interferogram_matches_expansion(seed in any::<u64>()) {
        let s = setup(32, 8e-6);
        let o = random_field(&s, 32, seed, 2.0);
        let r = random_field(&s, 32, seed.wrapping_add(7), 2.0);
        let i = interferogram(&o, &r).unwrap();
        for ((ov, rv), v) in o.samples().iter().zip(r.samples()).zip(i.samples()) {
            let oracle = ov.norm_sqr() + rv.norm_sqr() + 2.0 * (ov * rv.conj()).re;
            prop_assert!((v - oracle).abs() <= 1e-12 * (ov.norm() + rv.norm()).powi(2));
        }
    }
}
