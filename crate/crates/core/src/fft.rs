//! Row/column 2D FFT on row-major buffers.
//!
//! Rows are transformed independently (in parallel when a rayon pool has
//! more than one worker), so results do not depend on the thread count.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::scalar::Real;

const TILE: usize = 32;

pub(crate) struct Fft2<T: Real> {
    nx: usize,
    ny: usize,
    rows: Arc<dyn Fft<T>>,
    cols: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft2<T> {
    pub(crate) fn new(nx: usize, ny: usize, direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            rows: planner.plan_fft(nx, direction),
            cols: planner.plan_fft(ny, direction),
        }
    }

    /// Unnormalized transform of a `ny × nx` row-major buffer, in place.
    /// `scratch` must hold `nx * ny` elements and is clobbered.
    pub(crate) fn process(&self, data: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        let (nx, ny) = (self.nx, self.ny);
        assert_eq!(data.len(), nx * ny);
        assert_eq!(scratch.len(), nx * ny);
        transform_rows(&*self.rows, data, nx);
        transpose(data, scratch, nx, ny);
        transform_rows(&*self.cols, scratch, ny);
        transpose(scratch, data, ny, nx);
    }
}

fn transform_rows<T: Real>(fft: &dyn Fft<T>, data: &mut [Complex<T>], len: usize) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(len).for_each_init(
        || vec![Complex::new(T::zero(), T::zero()); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

/// `src` is `rows × cols` row-major; `dst` becomes `cols × rows`.
fn transpose<T: Copy + Send + Sync>(src: &[T], dst: &mut [T], cols: usize, rows: usize) {
    dst.par_chunks_mut(rows * TILE)
        .enumerate()
        .for_each(|(band, out)| {
            let c0 = band * TILE;
            let c1 = (c0 + TILE).min(cols);
            for r0 in (0..rows).step_by(TILE) {
                let r1 = (r0 + TILE).min(rows);
                for c in c0..c1 {
                    let line = &mut out[(c - c0) * rows..(c - c0 + 1) * rows];
                    for r in r0..r1 {
                        line[r] = src[r * cols + c];
                    }
                }
            }
        });
}

/// Signed frequency index of FFT bin `k` on an axis of `n` bins.
#[inline]
pub(crate) fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
