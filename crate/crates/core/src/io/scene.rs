//! Scene description files (TOML).
//!
//! ```toml
//! name = "two_points"
//!
//! [grid]               # all optional: 1024 x 1024 at 8 µm
//! nx = 1024
//! ny = 1024
//! pitch = 8e-6
//!
//! [optics]             # wavelengths default to [532e-9]
//! wavelengths = [532e-9]
//! pad_factor = 2
//! band_limit = true
//!
//! [object]
//! diffuse = true
//! seed = 0
//! accumulation = "coherent"   # or "incoherent"
//!
//! [reference]          # radians; tilt_x defaults to 1°
//! amplitude = 1.0
//! tilt_x = 0.017453292519943295
//! tilt_y = 0.0
//! phase_offset = 0.0
//!
//! [mask]
//! mode = "linear"      # or "binary"
//! bias = 0.0
//! gain = "auto"        # or a number
//! binary_threshold = 0.5
//!
//! [sweep]              # defaults: 0.5·nearest to 1.5·farthest |depth|, 41 steps
//! zmin = 0.1
//! zmax = 0.3
//! steps = 41
//!
//! [lens]               # optional
//! focal_length = 5e-3
//! aperture_diameter = 5e-3
//!
//! [scan]               # optional, needs [lens]
//! chip_min = 5.005e-3
//! chip_max = 5.25e-3
//!
//! [[slice]]            # one or more, depths strictly increasing and negative
//! image = "far.pgm"    # relative to the scene file
//! depth = -0.25
//! extent = 2e-3
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mvs::{LensSpec, ScanSpec, Scene, Slice};
use crate::propagation::{PadFactor, PropagationSpec};
use crate::rtrh::{Gain, MaskMode, MaskSpec, ReferenceSpec};
use crate::setup::{
    Accumulation, GridSpec, OpticalSetup, DEFAULT_GRID, DEFAULT_PITCH, DEFAULT_WAVELENGTH,
};

/// Depth sweep used by the focus search, viewer-side meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub steps: usize,
}

/// Where a slice came from, kept so a parsed scene can be written back.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSource {
    pub image: PathBuf,
    pub depth: f64,
    pub extent: f64,
}

/// Fully validated scene file with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    pub scene: Scene<f64>,
    /// Setup for the first wavelength.
    pub setup: OpticalSetup<f64>,
    pub wavelengths: Vec<f64>,
    pub reference: ReferenceSpec<f64>,
    pub mask: MaskSpec<f64>,
    pub sweep: SweepSpec,
    pub lens: Option<LensSpec<f64>>,
    pub scan: Option<ScanSpec<f64>>,
    pub sources: Vec<SliceSource>,
}

impl SceneConfig {
    /// One setup per configured wavelength.
    pub fn setups(&self) -> Result<Vec<OpticalSetup<f64>>> {
        self.wavelengths
            .iter()
            .map(|&w| self.setup.with_wavelength(w))
            .collect()
    }
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    optics: RawOptics,
    #[serde(default)]
    object: RawObject,
    #[serde(default)]
    reference: RawReference,
    #[serde(default)]
    mask: RawMask,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(skip_serializing_if = "Option::is_none")]
    lens: Option<RawLens>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scan: Option<RawScan>,
    #[serde(default, rename = "slice")]
    slices: Vec<RawSlice>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: Option<usize>,
    ny: Option<usize>,
    pitch: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawOptics {
    wavelengths: Option<Vec<f64>>,
    pad_factor: Option<usize>,
    band_limit: Option<bool>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    diffuse: Option<bool>,
    seed: Option<u64>,
    accumulation: Option<Accumulation>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    amplitude: Option<f64>,
    tilt_x: Option<f64>,
    tilt_y: Option<f64>,
    phase_offset: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum RawGain {
    Fixed(f64),
    Word(String),
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
enum RawMode {
    Linear,
    Binary,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawMask {
    mode: Option<RawMode>,
    bias: Option<f64>,
    gain: Option<RawGain>,
    binary_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    zmin: Option<f64>,
    zmax: Option<f64>,
    steps: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawLens {
    focal_length: f64,
    aperture_diameter: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    chip_min: f64,
    chip_max: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSlice {
    image: PathBuf,
    depth: f64,
    extent: f64,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::validation(field, message)
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(
            field,
            format!("must be a positive number, got {v}"),
        ))
    }
}

/// Parses and validates a scene file, loading every slice image.
pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: RawScene = toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map_or(0, |s| text[..s.start].matches('\n').count() + 1);
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.message().to_string(),
        }
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let default_name = path
        .file_stem()
        .map_or_else(|| "scene".to_string(), |s| s.to_string_lossy().into_owned());
    resolve(raw, base, default_name)
}

fn resolve(raw: RawScene, base: &Path, default_name: String) -> Result<SceneConfig> {
    let name = raw.name.unwrap_or(default_name);

    let nx = raw.grid.nx.unwrap_or(DEFAULT_GRID);
    let ny = raw.grid.ny.unwrap_or(DEFAULT_GRID);
    if nx < 2 || ny < 2 {
        return Err(invalid(
            "grid",
            format!("need at least 2x2 samples, got {nx}x{ny}"),
        ));
    }
    let pitch = positive("grid.pitch", raw.grid.pitch.unwrap_or(DEFAULT_PITCH))?;
    let grid = GridSpec::new(nx, ny, pitch)?;

    let wavelengths = raw
        .optics
        .wavelengths
        .unwrap_or_else(|| vec![DEFAULT_WAVELENGTH]);
    if wavelengths.is_empty() {
        return Err(invalid(
            "optics.wavelengths",
            "at least one wavelength is required",
        ));
    }
    for (i, &w) in wavelengths.iter().enumerate() {
        positive(&format!("optics.wavelengths[{i}]"), w)?;
    }
    let pad = raw.optics.pad_factor.unwrap_or(2);
    let pad_factor = PadFactor::new(pad)
        .map_err(|_| invalid("optics.pad_factor", format!("must be 1, 2 or 4, got {pad}")))?;
    let mut setup = OpticalSetup::new(grid, wavelengths[0])?;
    setup.propagation =
        PropagationSpec::angular_spectrum(pad_factor, raw.optics.band_limit.unwrap_or(true));
    setup.diffuse = raw.object.diffuse.unwrap_or(true);
    setup.seed = raw.object.seed.unwrap_or(0);
    setup.accumulation = raw.object.accumulation.unwrap_or_default();

    let r = &raw.reference;
    let default_ref = ReferenceSpec::default();
    let amplitude = positive(
        "reference.amplitude",
        r.amplitude.unwrap_or(default_ref.amplitude),
    )?;
    let tilt_x = r.tilt_x.unwrap_or(default_ref.tilt_x);
    let tilt_y = r.tilt_y.unwrap_or(default_ref.tilt_y);
    let phase_offset = r.phase_offset.unwrap_or(0.0);
    for (field, tilt) in [("reference.tilt_x", tilt_x), ("reference.tilt_y", tilt_y)] {
        if !(tilt.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(invalid(
                field,
                format!("must lie in (-pi/2, pi/2) radians, got {tilt}"),
            ));
        }
        let nyquist = 1.0 / (2.0 * pitch);
        for &w in &wavelengths {
            let f = tilt.sin().abs() / w;
            if f > nyquist {
                return Err(invalid(
                    field,
                    format!(
                        "carrier {f:.4e} cycles/m at {w:e} m exceeds the grid Nyquist {nyquist:.4e}"
                    ),
                ));
            }
        }
    }
    if !phase_offset.is_finite() {
        return Err(invalid("reference.phase_offset", "must be finite"));
    }
    let reference = ReferenceSpec::new(amplitude, tilt_x, tilt_y, phase_offset)?;

    let m = &raw.mask;
    let bias = m.bias.unwrap_or(0.0);
    if !(bias >= 0.0 && bias.is_finite()) {
        return Err(invalid("mask.bias", format!("must be >= 0, got {bias}")));
    }
    let gain = match &m.gain {
        None => Gain::Auto,
        Some(RawGain::Word(w)) if w == "auto" => Gain::Auto,
        Some(RawGain::Word(w)) => {
            return Err(invalid(
                "mask.gain",
                format!("expected \"auto\" or a number, got \"{w}\""),
            ))
        }
        Some(RawGain::Fixed(g)) if *g >= 0.0 && g.is_finite() => Gain::Fixed(*g),
        Some(RawGain::Fixed(g)) => {
            return Err(invalid("mask.gain", format!("must be >= 0, got {g}")))
        }
    };
    let threshold = m.binary_threshold.unwrap_or(0.5);
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(
            "mask.binary_threshold",
            format!("must lie in (0, 1), got {threshold}"),
        ));
    }
    let mode = match m.mode.unwrap_or(RawMode::Linear) {
        RawMode::Linear => MaskMode::Linear,
        RawMode::Binary => MaskMode::Binary,
    };
    let mask = MaskSpec::new(bias, gain, mode, threshold)?;

    if raw.slices.is_empty() {
        return Err(invalid("slice", "at least one [[slice]] is required"));
    }
    let mut slices = Vec::with_capacity(raw.slices.len());
    let mut sources = Vec::with_capacity(raw.slices.len());
    for (i, s) in raw.slices.iter().enumerate() {
        let field = |k: &str| format!("slice[{i}].{k}");
        if !(s.depth < 0.0 && s.depth.is_finite()) {
            return Err(invalid(
                field("depth"),
                format!(
                    "must be negative (projector side of the screen), got {}",
                    s.depth
                ),
            ));
        }
        if i > 0 && s.depth <= raw.slices[i - 1].depth {
            return Err(invalid(
                field("depth"),
                format!(
                    "depths monotonic: {} must be greater than the previous slice's {}",
                    s.depth,
                    raw.slices[i - 1].depth
                ),
            ));
        }
        let extent = positive(&field("extent"), s.extent)?;
        if extent > grid.width() * (1.0 + 1e-12) {
            return Err(invalid(
                field("extent"),
                format!("{extent} m exceeds the grid width {} m", grid.width()),
            ));
        }
        let joined = base.join(&s.image);
        let image = std::path::absolute(&joined).map_err(|e| Error::io(&joined, e))?;
        let pixels =
            super::read_slice_image(&image).map_err(|e| invalid(field("image"), e.to_string()))?;
        slices.push(
            Slice::new(pixels, s.depth, extent)
                .map_err(|e| invalid(field("image"), e.to_string()))?,
        );
        sources.push(SliceSource {
            image,
            depth: s.depth,
            extent,
        });
    }
    let scene = Scene::new(name, slices)?;

    let nearest = raw.slices.last().unwrap().depth.abs();
    let farthest = raw.slices[0].depth.abs();
    let z_min = positive("sweep.zmin", raw.sweep.zmin.unwrap_or(0.5 * nearest))?;
    let z_max = positive("sweep.zmax", raw.sweep.zmax.unwrap_or(1.5 * farthest))?;
    if z_max <= z_min {
        return Err(invalid(
            "sweep",
            format!("zmax {z_max} must exceed zmin {z_min}"),
        ));
    }
    let steps = raw.sweep.steps.unwrap_or(41);
    if steps < 2 {
        return Err(invalid("sweep.steps", format!("must be >= 2, got {steps}")));
    }
    let sweep = SweepSpec {
        z_min,
        z_max,
        steps,
    };

    let lens = raw
        .lens
        .as_ref()
        .map(|l| {
            positive("lens.focal_length", l.focal_length)?;
            positive("lens.aperture_diameter", l.aperture_diameter)?;
            LensSpec::new(l.focal_length, l.aperture_diameter)
        })
        .transpose()?;
    let scan = match (&raw.scan, &lens) {
        (None, _) => None,
        (Some(_), None) => return Err(invalid("scan", "requires a [lens] section")),
        (Some(s), Some(l)) => Some(
            ScanSpec::new(l, s.chip_min, s.chip_max).map_err(|e| invalid("scan", e.to_string()))?,
        ),
    };

    Ok(SceneConfig {
        scene,
        setup,
        wavelengths,
        reference,
        mask,
        sweep,
        lens,
        scan,
        sources,
    })
}

/// Writes a config back as a scene file with every default spelled out and
/// absolute image paths, so that loading it reproduces the same values.
pub fn save_scene(config: &SceneConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let s = &config.setup;
    let raw = RawScene {
        name: Some(config.scene.name.clone()),
        grid: RawGrid {
            nx: Some(s.grid.nx),
            ny: Some(s.grid.ny),
            pitch: Some(s.grid.pitch),
        },
        optics: RawOptics {
            wavelengths: Some(config.wavelengths.clone()),
            pad_factor: Some(s.propagation.pad_factor.get()),
            band_limit: Some(s.propagation.band_limit),
        },
        object: RawObject {
            diffuse: Some(s.diffuse),
            seed: Some(s.seed),
            accumulation: Some(s.accumulation),
        },
        reference: RawReference {
            amplitude: Some(config.reference.amplitude),
            tilt_x: Some(config.reference.tilt_x),
            tilt_y: Some(config.reference.tilt_y),
            phase_offset: Some(config.reference.phase_offset),
        },
        mask: RawMask {
            mode: Some(match config.mask.mode {
                MaskMode::Linear => RawMode::Linear,
                MaskMode::Binary => RawMode::Binary,
            }),
            bias: Some(config.mask.bias),
            gain: Some(match config.mask.gain {
                Gain::Auto => RawGain::Word("auto".into()),
                Gain::Fixed(g) => RawGain::Fixed(g),
            }),
            binary_threshold: Some(config.mask.binary_threshold),
        },
        sweep: RawSweep {
            zmin: Some(config.sweep.z_min),
            zmax: Some(config.sweep.z_max),
            steps: Some(config.sweep.steps),
        },
        lens: config.lens.map(|l| RawLens {
            focal_length: l.focal_length,
            aperture_diameter: l.aperture_diameter,
        }),
        scan: config.scan.map(|c| RawScan {
            chip_min: c.chip_distance_min,
            chip_max: c.chip_distance_max,
        }),
        slices: config
            .sources
            .iter()
            .map(|src| RawSlice {
                image: src.image.clone(),
                depth: src.depth,
                extent: src.extent,
            })
            .collect(),
    };
    let text =
        toml::to_string(&raw).map_err(|e| invalid("scene", format!("cannot serialize: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
