//! Simulation grid and per-wavelength optical configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Sampling;
use crate::propagation::PropagationSpec;
use crate::scalar::Real;

pub const DEFAULT_GRID: usize = 1024;
pub const DEFAULT_PITCH: f64 = 8e-6;
pub const DEFAULT_WAVELENGTH: f64 = 532e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub nx: usize,
    pub ny: usize,
    pub pitch: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(nx: usize, ny: usize, pitch: T) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "grid must be at least 2x2, got {nx}x{ny}"
            )));
        }
        if !(pitch > T::zero() && pitch.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "pitch must be > 0, got {pitch}"
            )));
        }
        Ok(GridSpec { nx, ny, pitch })
    }

    pub fn width(&self) -> T {
        T::from_usize(self.nx).unwrap() * self.pitch
    }

    pub fn height(&self) -> T {
        T::from_usize(self.ny).unwrap() * self.pitch
    }
}

/// How slices of a scene combine at the screen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accumulation {
    /// One coherent object wave, one hologram.
    #[default]
    Coherent,
    /// One hologram per slice; reconstructed intensities add.
    Incoherent,
}

/// Everything a single-wavelength run needs besides the scene and the
/// reference/mask parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct OpticalSetup<T> {
    pub grid: GridSpec<T>,
    pub wavelength: T,
    pub propagation: PropagationSpec,
    /// Random diffuser phase on every slice.
    pub diffuse: bool,
    pub seed: u64,
    pub accumulation: Accumulation,
}

impl<T: Real> OpticalSetup<T> {
    pub fn new(grid: GridSpec<T>, wavelength: T) -> Result<Self> {
        if !(wavelength > T::zero() && wavelength.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "wavelength must be > 0, got {wavelength}"
            )));
        }
        Ok(OpticalSetup {
            grid,
            wavelength,
            propagation: PropagationSpec::default(),
            diffuse: true,
            seed: 0,
            accumulation: Accumulation::Coherent,
        })
    }

    pub fn with_wavelength(&self, wavelength: T) -> Result<Self> {
        let mut out = Self::new(self.grid, wavelength)?;
        out.propagation = self.propagation;
        out.diffuse = self.diffuse;
        out.seed = self.seed;
        out.accumulation = self.accumulation;
        Ok(out)
    }

    /// Sampling of a plane at axial position `z`.
    pub fn sampling_at(&self, z: T) -> Sampling<T> {
        Sampling {
            pitch: self.grid.pitch,
            wavelength: self.wavelength,
            plane_z: z,
        }
    }

    pub fn screen_sampling(&self) -> Sampling<T> {
        self.sampling_at(T::zero())
    }
}

impl Default for OpticalSetup<f64> {
    fn default() -> Self {
        OpticalSetup::new(
            GridSpec::new(DEFAULT_GRID, DEFAULT_GRID, DEFAULT_PITCH).unwrap(),
            DEFAULT_WAVELENGTH,
        )
        .unwrap()
    }
}
