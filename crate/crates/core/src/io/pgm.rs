//! Binary portable graymap (P5), 8 or 16 bits, big-endian samples.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::IntensityMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scaling {
    #[default]
    Linear,
    Log,
}

/// Reads a P5 image, scaling samples by the header's maxval into [0, 1].
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Slice images are plain graymaps.
pub fn read_slice_image(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    read_pgm(path)
}

fn decode(bytes: &[u8]) -> Result<Array2<f64>> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::UnsupportedFormat("not a netpbm file".into()));
    }
    if bytes[1] != b'5' {
        return Err(Error::UnsupportedFormat(format!(
            "P{} (only binary graymaps, P5, are read)",
            bytes[1] as char
        )));
    }
    let mut pos = 2;
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        *slot = header_number(bytes, &mut pos, name)?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err(Error::CorruptHeader(format!("zero size {width}x{height}")));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(Error::CorruptHeader(format!(
            "maxval {maxval} outside 1..=65535"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(Error::CorruptHeader(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    let depth = if maxval < 256 { 1 } else { 2 };
    let need = width * height * depth;
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(Error::CorruptHeader(format!(
            "raster holds {} bytes, {width}x{height} needs {need}",
            raster.len()
        )));
    }
    let scale = maxval as f64;
    Ok(Array2::from_shape_fn((height, width), |(r, c)| {
        let i = (r * width + c) * depth;
        let raw = if depth == 1 {
            raster[i] as u16
        } else {
            u16::from_be_bytes([raster[i], raster[i + 1]])
        };
        raw as f64 / scale
    }))
}

fn header_number(bytes: &[u8], pos: &mut usize, name: &str) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::CorruptHeader(format!("missing or invalid {name}")))
}

/// Writes raw 16-bit samples as a P5 file with maxval 65535.
pub fn write_pgm16(path: impl AsRef<Path>, samples: &Array2<u16>) -> Result<()> {
    let path = path.as_ref();
    let (rows, cols) = samples.dim();
    let mut out = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
    out.reserve(rows * cols * 2);
    for v in samples.iter() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Maps an intensity array to 16-bit codes.
///
/// Linear: `round(65535·I/max)`. Log: `round(65535·ln(1 + I/ε)/ln(1 + max/ε))`
/// with `ε = 1e-12·max`. An all-zero input encodes to zeros.
pub fn encode_intensity(samples: &Array2<f64>, scaling: Scaling) -> Array2<u16> {
    let max = samples.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Array2::zeros(samples.dim());
    }
    match scaling {
        Scaling::Linear => samples.mapv(|v| (65535.0 * v / max).round() as u16),
        Scaling::Log => {
            let eps = 1e-12 * max;
            let top = (max / eps).ln_1p();
            samples.mapv(|v| (65535.0 * (v / eps).ln_1p() / top).round() as u16)
        }
    }
}

pub fn write_intensity_image(
    map: &IntensityMap<f64>,
    path: impl AsRef<Path>,
    scaling: Scaling,
) -> Result<()> {
    write_pgm16(path, &encode_intensity(map.samples(), scaling))
}

/// Writes values already in [0, 1] (e.g. a transmittance) without rescaling.
pub fn write_unit_image(values: &Array2<f64>, path: impl AsRef<Path>) -> Result<()> {
    let codes = values.mapv(|v| (65535.0 * v.clamp(0.0, 1.0)).round() as u16);
    write_pgm16(path, &codes)
}
