//! Raw complex field dump.
//!
//! Layout: seven newline-terminated ASCII header lines
//!
//! ```text
//! HOLOSIM-FIELD v1
//! nx <usize>
//! ny <usize>
//! pitch <f64>
//! wavelength <f64>
//! plane_z <f64>
//! endianness little
//! ```
//!
//! followed by `nx·ny` samples in row-major order, each as two IEEE-754
//! binary64 values (re, im) in little-endian byte order. Floats in the header
//! use the shortest representation that parses back to the same bits.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Sampling};

pub const FIELD_MAGIC: &str = "HOLOSIM-FIELD v1";

pub fn write_field(field: &ComplexField<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let s = field.sampling();
    let mut out = format!(
        "{FIELD_MAGIC}\nnx {}\nny {}\npitch {:e}\nwavelength {:e}\nplane_z {:e}\nendianness little\n",
        field.nx(),
        field.ny(),
        s.pitch,
        s.wavelength,
        s.plane_z
    )
    .into_bytes();
    out.reserve(field.nx() * field.ny() * 16);
    for u in field.samples().iter() {
        out.extend_from_slice(&u.re.to_le_bytes());
        out.extend_from_slice(&u.im.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ComplexField<f64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

fn decode(bytes: &[u8]) -> Result<ComplexField<f64>> {
    let mut pos = 0;
    let mut line = |expect: &str| -> Result<String> {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::HeaderMismatch(format!("header ends before '{expect}'")))?;
        let text = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| Error::HeaderMismatch("header is not ASCII".into()))?
            .to_string();
        pos += end + 1;
        if expect.is_empty() {
            return Ok(text);
        }
        text.strip_prefix(expect)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| Error::HeaderMismatch(format!("expected '{expect}', found '{text}'")))
    };
    let magic = line("")?;
    if magic != FIELD_MAGIC {
        return Err(Error::HeaderMismatch(format!("bad magic '{magic}'")));
    }
    let nx: usize = parse(&line("nx")?, "nx")?;
    let ny: usize = parse(&line("ny")?, "ny")?;
    let pitch: f64 = parse(&line("pitch")?, "pitch")?;
    let wavelength: f64 = parse(&line("wavelength")?, "wavelength")?;
    let plane_z: f64 = parse(&line("plane_z")?, "plane_z")?;
    let endian = line("endianness")?;
    if endian != "little" {
        return Err(Error::HeaderMismatch(format!(
            "unsupported endianness '{endian}'"
        )));
    }
    let payload = &bytes[pos..];
    let expected = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(16))
        .ok_or_else(|| Error::HeaderMismatch(format!("grid {nx}x{ny} too large")))?;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::HeaderMismatch(format!(
            "header declares {nx}x{ny} ({expected} bytes) but payload has {} bytes",
            payload.len()
        )));
    }
    let sampling = Sampling::new(pitch, wavelength, plane_z)
        .map_err(|e| Error::HeaderMismatch(e.to_string()))?;
    let word = |i: usize| f64::from_le_bytes(payload[i..i + 8].try_into().unwrap());
    let samples = Array2::from_shape_fn((ny, nx), |(iy, ix)| {
        let i = (iy * nx + ix) * 16;
        Complex::new(word(i), word(i + 8))
    });
    ComplexField::new(samples, sampling).map_err(|e| Error::HeaderMismatch(e.to_string()))
}

fn parse<V: std::str::FromStr>(text: &str, name: &str) -> Result<V> {
    text.trim()
        .parse()
        .map_err(|_| Error::HeaderMismatch(format!("invalid {name} '{text}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field() -> ComplexField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = Sampling::new(8e-6, 532e-9, -0.123456789).unwrap();
        ComplexField::from_fn(64, 48, s, |_, _| {
            Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() * 1e-200)
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let f = random_field();
        write_field(&f, &path).unwrap();
        let g = read_field(&path).unwrap();
        assert_eq!(g.sampling(), f.sampling());
        for (a, b) in f.samples().iter().zip(g.samples()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn truncated_and_mismatched() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        write_field(&random_field(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(matches!(
            decode(&bytes[..bytes.len() - 5]),
            Err(Error::TruncatedPayload { .. })
        ));
        let mut long = bytes.clone();
        long.extend_from_slice(&[0u8; 16]);
        assert!(matches!(decode(&long), Err(Error::HeaderMismatch(_))));
        let text = String::from_utf8_lossy(&bytes[..60]).replace("nx 64", "nx 32");
        let mut wrong = text.into_bytes();
        wrong.extend_from_slice(&bytes[60..]);
        assert!(matches!(decode(&wrong), Err(Error::HeaderMismatch(_))));
        assert!(matches!(decode(b"NOPE\n"), Err(Error::HeaderMismatch(_))));
    }
}
