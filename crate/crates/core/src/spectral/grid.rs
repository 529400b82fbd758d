//! Uniform periodic grid on [0, 2pi)^d with planned FFTs.
//!
//! The domain length is 2pi per dimension, so wavenumbers are the integer
//! lattice k in [-n/2, n/2)^d. Linear indices are C-ordered with axis 0
//! slowest. Fourier coefficients follow the convention
//!
//! ```text
//! f(x_j) = sum_k  c(k) exp(i k . x_j),      c(k) = DFT(f) / n^d,
//! ```
//!
//! so the L2 norm on the physical domain carries the Parseval factor
//! (2pi)^d: ||f||^2 = (2pi)^d sum_k |c(k)|^2.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Uniform N^d periodic grid, d = 2 or 3.
pub struct Grid {
    d: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("d", &self.d)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

impl Grid {
    pub fn new(d: usize, n: usize) -> Result<Arc<Grid>> {
        if !(d == 2 || d == 3) {
            return Err(Error::InvalidParameter(format!(
                "spatial dimension must be 2 or 3 (got {d})"
            )));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid points per dimension must be even and >= 8 (got {n})"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Arc::new(Grid {
            d,
            n,
            forward,
            inverse,
        }))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Points per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points / retained modes, n^d.
    pub fn size(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Grid spacing 2pi / n.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Quadrature weight per point, (2pi/n)^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Wavenumber of a per-axis index: i for i < n/2, i - n otherwise.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Per-axis indices of a linear index (axis 0 slowest).
    #[inline]
    pub fn indices(&self, mut lin: usize) -> [usize; 3] {
        let mut ix = [0usize; 3];
        for axis in (0..self.d).rev() {
            ix[axis] = lin % self.n;
            lin /= self.n;
        }
        ix
    }

    /// Integer wavevector of a linear index; unused axes are zero.
    #[inline]
    pub fn wavevector(&self, lin: usize) -> [i64; 3] {
        let ix = self.indices(lin);
        let mut k = [0i64; 3];
        for axis in 0..self.d {
            k[axis] = self.wavenumber(ix[axis]);
        }
        k
    }

    /// |k|^2 of a linear index.
    #[inline]
    pub fn k_norm_sq(&self, lin: usize) -> f64 {
        let k = self.wavevector(lin);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// Linear index of an integer wavevector (components reduced mod n).
    pub fn index_of_mode(&self, k: &[i64]) -> Result<usize> {
        if k.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "mode index with {} components on a {}-dimensional grid",
                k.len(),
                self.d
            )));
        }
        let half = (self.n / 2) as i64;
        let mut lin = 0usize;
        for &ki in k {
            if ki < -half || ki >= half {
                return Err(Error::InvalidParameter(format!(
                    "wavenumber {ki} outside [-{half}, {half})"
                )));
            }
            let i = ki.rem_euclid(self.n as i64) as usize;
            lin = lin * self.n + i;
        }
        Ok(lin)
    }

    /// Physical coordinates of a linear index.
    pub fn point(&self, lin: usize) -> [f64; 3] {
        let ix = self.indices(lin);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.d {
            x[axis] = h * ix[axis] as f64;
        }
        x
    }

    pub fn same(&self, other: &Grid) -> bool {
        self == other
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let stride = n.pow((self.d - 1 - axis) as u32);
        let block = stride * n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut base = 0;
        while base < data.len() {
            for start in base..base + stride {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
            base += block;
        }
    }

    /// Physical samples -> Fourier coefficients (normalized by n^d).
    pub(crate) fn forward_transform(&self, data: &mut [Complex64]) {
        let fft = self.forward.clone();
        for axis in 0..self.d {
            self.transform_axis(data, axis, &fft);
        }
        let scale = 1.0 / self.size() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Fourier coefficients -> physical samples (unnormalized inverse).
    pub(crate) fn inverse_transform(&self, data: &mut [Complex64]) {
        let fft = self.inverse.clone();
        for axis in 0..self.d {
            self.transform_axis(data, axis, &fft);
        }
    }
}
