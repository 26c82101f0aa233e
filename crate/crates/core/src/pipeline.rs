//! End-to-end runs: scene → object wave → hologram mask → reconstruction →
//! metrics, plus the artifacts written for each run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::field::{ComplexField, IntensityMap};
use crate::io::{self, Scaling, SceneConfig};
use crate::metrics::{
    self, focus_over, local_maxima, order_spectra, speckle_contrast, sweep_depths, FocusResult,
    ReconstructionReport, Roi,
};
use crate::mvs::{resample_slice, slice_object_fields};
use crate::propagation::angular_spectrum_propagate;
use crate::rtrh::{
    interferogram, reference_wave, term_fields, transmission_mask, Gain, MaskMode, MaskSpec,
    Reconstructor, TermFields, TransmissionMask,
};
use crate::setup::{Accumulation, OpticalSetup};

type Field = ComplexField<f64>;
type Intensity = IntensityMap<f64>;

/// One recorded hologram: the object wave it was made from and its mask.
/// Coherent runs have one; incoherent runs have one per slice.
pub struct Hologram {
    pub object: Field,
    pub interferogram: Intensity,
    pub mask: TransmissionMask<f64>,
}

/// Everything computed for one wavelength.
pub struct ChannelResult {
    pub wavelength: f64,
    pub reference: Field,
    pub holograms: Vec<Hologram>,
    /// Sum of the holograms' interferograms.
    pub interferogram: Intensity,
    pub focus: FocusResult<f64>,
    /// Reconstructed intensity at the focus depth.
    pub reconstruction: Intensity,
    /// Coherent runs only: the reconstructed field at the focus depth.
    pub reconstruction_field: Option<Field>,
    /// Attenuated reference, real image and virtual image at the focus depth.
    pub term_images: [Intensity; 3],
    pub report: ReconstructionReport,
}

pub const TERM_NAMES: [&str; 3] = ["attenuated_reference", "real_image", "virtual_image"];

/// Records the hologram(s) of the scene at one wavelength.
pub fn record(config: &SceneConfig, setup: &OpticalSetup<f64>) -> Result<(Field, Vec<Hologram>)> {
    let reference = reference_wave(&config.reference, setup)?;
    let objects = slice_object_fields(&config.scene, setup)?;
    let objects = match setup.accumulation {
        Accumulation::Incoherent => objects,
        Accumulation::Coherent => {
            let mut it = objects.into_iter();
            let mut total = it.next().expect("scene has at least one slice");
            for f in it {
                total = total.combine(&f, crate::field::CombineOp::Add)?;
            }
            vec![total]
        }
    };
    let holograms = objects
        .into_iter()
        .map(|object| {
            let interferogram = interferogram(&object, &reference)?;
            let mask = transmission_mask(&interferogram, &config.mask);
            Ok(Hologram {
                object,
                interferogram,
                mask,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((reference, holograms))
}

fn sum_maps(maps: impl IntoIterator<Item = Intensity>) -> Result<Intensity> {
    let mut it = maps.into_iter();
    let mut total = it.next().expect("at least one map");
    for m in it {
        total = total.accumulate(&m)?;
    }
    Ok(total)
}

/// Reconstruction renderer summing intensities over all holograms.
pub struct Volume {
    parts: Vec<Reconstructor<f64>>,
}

impl Volume {
    pub fn new(
        config: &SceneConfig,
        setup: &OpticalSetup<f64>,
        holograms: &[Hologram],
    ) -> Result<Self> {
        let parts = holograms
            .iter()
            .map(|h| Reconstructor::new(&h.mask, &config.reference, setup))
            .collect::<Result<Vec<_>>>()?;
        Ok(Volume { parts })
    }

    pub fn field(&self, z: f64) -> Option<Field> {
        (self.parts.len() == 1).then(|| self.parts[0].at(z))
    }

    pub fn intensity(&self, z: f64) -> Result<Intensity> {
        sum_maps(self.parts.iter().map(|r| r.at(z).intensity()))
    }
}

/// Mask used for the three-term split. The configured mask is used when it
/// is linear and unclamped; otherwise an auto-gain linear mask stands in.
fn term_mask(config: &SceneConfig, holograms: &[Hologram]) -> (MaskSpec<f64>, &'static str) {
    let linear = config.mask.mode == MaskMode::Linear;
    if linear
        && holograms
            .iter()
            .all(|h| h.mask.max_pre_clamp <= 1.0 + 1e-12)
    {
        (config.mask, "configured")
    } else {
        (
            MaskSpec::linear(0.0, Gain::Auto).expect("valid"),
            "auto_linear",
        )
    }
}

fn all_terms(
    holograms: &[Hologram],
    reference: &Field,
    spec: &MaskSpec<f64>,
) -> Result<Vec<TermFields<f64>>> {
    holograms
        .iter()
        .map(|h| term_fields(&h.object, reference, spec))
        .collect()
}

/// The real-image term with the reference carrier removed, `β·|R|²·O*`.
/// For an on-axis reference this is the real-image term itself; for a tilted
/// one it is the same image seen along its diffraction direction.
fn aligned_real_image(terms: &TermFields<f64>, reference: &Field) -> Result<Field> {
    // β·R²·O* · conj(R)² / |R|² = β·|R|²·O*
    let aligned = Zip::from(terms.real_image.samples())
        .and(reference.samples())
        .map_collect(|t, r| *t * r.conj() * r.conj() / r.norm_sqr());
    terms.real_image.with_samples(aligned)
}

/// Support of a slice on the grid, shrunk by `radius` samples.
fn eroded_support(truth: &Array2<f64>, radius: usize) -> Array2<bool> {
    let max = truth.iter().cloned().fold(0.0, f64::max);
    let support = truth.mapv(|v| max > 0.0 && v >= 0.5 * max);
    if radius == 0 {
        return support;
    }
    let (ny, nx) = support.dim();
    // Separable min filter: a sample survives if the whole square around it
    // lies inside the support.
    let mut rows = Array2::from_elem((ny, nx), false);
    for iy in 0..ny {
        for ix in radius..nx.saturating_sub(radius) {
            rows[[iy, ix]] = (ix - radius..=ix + radius).all(|k| support[[iy, k]]);
        }
    }
    let mut out = Array2::from_elem((ny, nx), false);
    for iy in radius..ny.saturating_sub(radius) {
        for ix in 0..nx {
            out[[iy, ix]] = (iy - radius..=iy + radius).all(|k| rows[[k, ix]]);
        }
    }
    if out.iter().any(|&b| b) {
        out
    } else {
        support
    }
}

/// Resolution cell at distance `z` in samples: λz / (N·p²), rounded up.
fn resolution_cell(setup: &OpticalSetup<f64>, z: f64) -> usize {
    let g = setup.grid;
    let n = g.nx.min(g.ny) as f64;
    (setup.wavelength * z / (n * g.pitch * g.pitch)).ceil() as usize
}

/// Image-plane scores for one slice: NCC against the slice picture and
/// speckle contrast over its eroded support, both on the real image.
pub struct SliceScore {
    pub slice: usize,
    pub depth: f64,
    pub mirror_depth: f64,
    pub ncc: Option<f64>,
    pub speckle_contrast: f64,
}

fn score_slices(
    config: &SceneConfig,
    setup: &OpticalSetup<f64>,
    holograms: &[Hologram],
    reference: &Field,
    which: &[usize],
) -> Result<Vec<SliceScore>> {
    let spec = MaskSpec::linear(0.0, Gain::Auto).expect("valid");
    let images = holograms
        .iter()
        .map(|h| {
            let terms = term_fields(&h.object, reference, &spec)?;
            aligned_real_image(&terms, reference)
        })
        .collect::<Result<Vec<_>>>()?;
    which
        .iter()
        .map(|&i| {
            let slice = &config.scene.slices()[i];
            let z = -slice.depth;
            let intensity = sum_maps(
                images
                    .iter()
                    .map(|f| angular_spectrum_propagate(f, z, &setup.propagation).intensity()),
            )?;
            let truth = resample_slice(slice, setup)?;
            let ncc = match metrics::ncc(&intensity, &truth) {
                Ok(v) => Some(v),
                Err(Error::ZeroVariance) => None,
                Err(e) => return Err(e),
            };
            let roi = Roi::Mask(eroded_support(&truth, resolution_cell(setup, z)));
            let speckle = match speckle_contrast(&intensity, &roi) {
                Ok(v) => v,
                Err(Error::EmptyRoi) => 0.0,
                Err(e) => return Err(e),
            };
            Ok(SliceScore {
                slice: i,
                depth: slice.depth,
                mirror_depth: z,
                ncc,
                speckle_contrast: speckle,
            })
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Runs the full pipeline at one wavelength.
pub fn simulate_channel(config: &SceneConfig, setup: &OpticalSetup<f64>) -> Result<ChannelResult> {
    let (reference, holograms) = record(config, setup)?;
    let interferogram = sum_maps(holograms.iter().map(|h| h.interferogram.clone()))?;

    let depths = sweep_depths(config.sweep.z_min, config.sweep.z_max, config.sweep.steps)?;
    let volume = Volume::new(config, setup, &holograms)?;
    let focus = focus_over(&depths, |z| volume.intensity(z))?;
    let reconstruction = volume.intensity(focus.depth)?;
    let reconstruction_field = volume.field(focus.depth);
    drop(volume);

    let (spec, term_rule) = term_mask(config, &holograms);
    let terms = all_terms(&holograms, &reference, &spec)?;
    let mut budget_power = [0.0; 3];
    let mut term_images: Vec<Intensity> = Vec::with_capacity(3);
    for (k, slot) in budget_power.iter_mut().enumerate() {
        let pick = |t: &TermFields<f64>| match k {
            0 => t.attenuated_reference.clone(),
            1 => t.real_image.clone(),
            _ => t.virtual_image.clone(),
        };
        *slot = terms.iter().map(|t| pick(t).power()).sum();
        term_images.push(sum_maps(terms.iter().map(|t| {
            angular_spectrum_propagate(&pick(t), focus.depth, &setup.propagation).intensity()
        }))?);
    }
    drop(terms);
    let total: f64 = budget_power.iter().sum();
    let mut fractions = BTreeMap::new();
    for (name, p) in TERM_NAMES.iter().zip(budget_power) {
        fractions.insert(
            format!("term.{name}"),
            if total > 0.0 { p / total } else { 0.0 },
        );
    }

    let carrier = config.reference.carrier(setup.wavelength);
    if carrier != (0.0, 0.0) {
        let orders = order_spectra(&holograms[0].mask.as_field(), carrier)?;
        fractions.insert("order.minus".into(), orders.minus);
        fractions.insert("order.zero".into(), orders.zero);
        fractions.insert("order.plus".into(), orders.plus);
        fractions.insert("order.out_of_band".into(), orders.out_of_band);
    }

    // Image-plane metrics use the slice whose mirror depth is nearest focus.
    let nearest = config
        .scene
        .slices()
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (-a.1.depth - focus.depth).abs();
            let db = (-b.1.depth - focus.depth).abs();
            da.total_cmp(&db)
        })
        .map(|(i, _)| i)
        .expect("scene has slices");
    let score = score_slices(config, setup, &holograms, &reference, &[nearest])?
        .pop()
        .expect("one score");

    let g = setup.grid;
    let mut provenance = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        provenance.insert(k.to_string(), v);
    };
    put("scene", config.scene.name.clone());
    put("seed", setup.seed.to_string());
    put("wavelength_m", fmt(setup.wavelength));
    put("grid", format!("{}x{}", g.nx, g.ny));
    put("pitch_m", fmt(g.pitch));
    put("pad_factor", setup.propagation.pad_factor.get().to_string());
    put("band_limit", setup.propagation.band_limit.to_string());
    put("diffuse", setup.diffuse.to_string());
    put(
        "accumulation",
        format!("{:?}", setup.accumulation).to_lowercase(),
    );
    put("reference_amplitude", fmt(config.reference.amplitude));
    put("reference_tilt_x_rad", fmt(config.reference.tilt_x));
    put("reference_tilt_y_rad", fmt(config.reference.tilt_y));
    put(
        "mask_mode",
        format!("{:?}", config.mask.mode).to_lowercase(),
    );
    put("mask_bias", fmt(config.mask.bias));
    put("mask_gain_used", fmt(holograms[0].mask.gain));
    put(
        "mask_clamped",
        holograms.iter().any(|h| h.mask.was_clamped()).to_string(),
    );
    put("term_mask", term_rule.to_string());
    put(
        "sweep",
        format!(
            "{}..{} m, {} steps",
            fmt(config.sweep.z_min),
            fmt(config.sweep.z_max),
            config.sweep.steps
        ),
    );
    put(
        "order_bands",
        "strips of width c centred on -c, 0, +c along the carrier".into(),
    );
    put("image_metrics_slice", score.slice.to_string());
    put("image_metrics_depth_m", fmt(score.mirror_depth));
    put(
        "solid_angle_screen",
        "full grid seen from the focus depth".into(),
    );

    let report = ReconstructionReport {
        focus_depth: focus.depth,
        focus_xy: focus.xy,
        peak_intensity: focus.peak,
        peak_to_mean: focus.peak_to_mean,
        ncc: score.ncc,
        speckle_contrast: score.speckle_contrast,
        power_fractions: fractions,
        solid_angle_sr: metrics::solid_angle(g.width(), g.height(), focus.depth),
        provenance,
    };
    let term_images: [Intensity; 3] = term_images
        .try_into()
        .unwrap_or_else(|_| unreachable!("three terms"));
    Ok(ChannelResult {
        wavelength: setup.wavelength,
        reference,
        holograms,
        interferogram,
        focus,
        reconstruction,
        reconstruction_field,
        term_images,
        report,
    })
}

fn write_curve(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes one channel's artifacts into `dir` and returns the written paths.
pub fn write_channel(
    channel: &ChannelResult,
    dir: &Path,
    dump_fields: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    io::write_intensity_image(
        &channel.interferogram,
        path("interferogram.pgm"),
        Scaling::Linear,
    )?;
    if channel.holograms.len() == 1 {
        io::write_unit_image(channel.holograms[0].mask.transmittance(), path("mask.pgm"))?;
    } else {
        for (i, h) in channel.holograms.iter().enumerate() {
            io::write_unit_image(h.mask.transmittance(), path(&format!("mask_slice{i}.pgm")))?;
        }
    }
    io::write_intensity_image(
        &channel.reconstruction,
        path("reconstruction.pgm"),
        Scaling::Linear,
    )?;
    for (name, img) in TERM_NAMES.iter().zip(&channel.term_images) {
        io::write_intensity_image(img, path(&format!("term_{name}.pgm")), Scaling::Linear)?;
    }
    let maxima = local_maxima(&channel.focus.curve);
    let curve_path = path("focus_curve.csv");
    write_curve(
        &curve_path,
        &["z_m", "peak_intensity", "local_max"],
        channel
            .focus
            .curve
            .iter()
            .enumerate()
            .map(|(i, (z, p))| vec![fmt(*z), fmt(*p), maxima.contains(&i).to_string()]),
    )?;
    io::write_report(&channel.report, path("report.csv"))?;
    if dump_fields {
        if channel.holograms.len() == 1 {
            io::write_field(&channel.holograms[0].object, path("object_field.bin"))?;
        } else {
            for (i, h) in channel.holograms.iter().enumerate() {
                io::write_field(&h.object, path(&format!("object_field_slice{i}.bin")))?;
            }
        }
        io::write_field(&channel.reference, path("reference_field.bin"))?;
        if let Some(f) = &channel.reconstruction_field {
            io::write_field(f, path("reconstruction_field.bin"))?;
        }
    }
    Ok(written)
}

/// Output directory name for a wavelength in a multi-wavelength run.
pub fn channel_dir_name(wavelength: f64) -> String {
    format!("lambda_{:.0}nm", wavelength * 1e9)
}

/// Runs every configured wavelength and writes all artifacts under `out`.
/// Single-wavelength runs write directly into `out`; otherwise each
/// wavelength gets its own subdirectory and `preview_ch<i>.pgm` holds each
/// channel's focused reconstruction.
pub fn simulate(
    config: &SceneConfig,
    out: &Path,
    dump_fields: bool,
) -> Result<Vec<ReconstructionReport>> {
    let setups = config.setups()?;
    let mut reports = Vec::with_capacity(setups.len());
    for (i, setup) in setups.iter().enumerate() {
        let channel = simulate_channel(config, setup)?;
        if setups.len() == 1 {
            write_channel(&channel, out, dump_fields)?;
        } else {
            write_channel(
                &channel,
                &out.join(channel_dir_name(setup.wavelength)),
                dump_fields,
            )?;
            io::write_intensity_image(
                &channel.reconstruction,
                out.join(format!("preview_ch{i}.pgm")),
                Scaling::Linear,
            )?;
        }
        reports.push(channel.report);
    }
    Ok(reports)
}

/// Result of a depth sweep over the reconstruction volume.
pub struct SweepResult {
    pub focus: FocusResult<f64>,
    pub local_maxima: Vec<usize>,
    pub slices: Vec<SliceScore>,
}

/// Peak-versus-depth curve at the first wavelength plus per-slice NCC.
pub fn sweep(config: &SceneConfig, z_range: (f64, f64), steps: usize) -> Result<SweepResult> {
    let setup = &config.setup;
    let depths = sweep_depths(z_range.0, z_range.1, steps)?;
    let (reference, holograms) = record(config, setup)?;
    let volume = Volume::new(config, setup, &holograms)?;
    let focus = focus_over(&depths, |z| volume.intensity(z))?;
    drop(volume);
    let all: Vec<usize> = (0..config.scene.slices().len()).collect();
    let slices = score_slices(config, setup, &holograms, &reference, &all)?;
    Ok(SweepResult {
        local_maxima: local_maxima(&focus.curve),
        focus,
        slices,
    })
}

pub fn write_sweep(result: &SweepResult, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let curve = out.join("peak_curve.csv");
    write_curve(
        &curve,
        &["z_m", "peak_intensity", "local_max"],
        result.focus.curve.iter().enumerate().map(|(i, (z, p))| {
            vec![
                fmt(*z),
                fmt(*p),
                result.local_maxima.contains(&i).to_string(),
            ]
        }),
    )?;
    let table = out.join("slice_ncc.csv");
    write_curve(
        &table,
        &[
            "slice",
            "depth_m",
            "mirror_depth_m",
            "ncc",
            "speckle_contrast",
        ],
        result.slices.iter().map(|s| {
            vec![
                s.slice.to_string(),
                fmt(s.depth),
                fmt(s.mirror_depth),
                s.ncc.map_or_else(|| "none".to_string(), fmt),
                fmt(s.speckle_contrast),
            ]
        }),
    )?;
    Ok(vec![curve, table])
}
