//! Periodic rectangular grids in 2 or 3 dimensions, scalar fields on them,
//! discrete Fourier transforms, and mode-wise Helmholtz solves.
//!
//! Conventions fixed here and relied on by file I/O and tests:
//! - nodes sit at `x_k = (k_1 h_1, ..., k_d h_d)` with `h_i = L_i / K_i`,
//!   stored row-major with `k_1` slowest;
//! - signed frequencies live in `[-K_i/2, K_i/2 - 1]` per axis;
//! - the forward transform is unscaled and the inverse carries the `1/N`
//!   factor, so the normalized zero mode `c_0 / N` is the grid mean.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("grid axis {axis} has invalid size {size}")]
    BadSize { axis: usize, size: usize },
    #[error("grid axis {axis} has invalid length {length}")]
    BadLength { axis: usize, length: f64 },
    #[error("frequency {k} out of range [{lo}, {hi}] on axis {axis}")]
    FrequencyOutOfRange { axis: usize, k: i64, lo: i64, hi: i64 },
    #[error("field has {got} values, grid expects {want}")]
    SizeMismatch { got: usize, want: usize },
}

/// Periodic grid geometry: per-axis node counts and box lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    sizes: Vec<usize>,
    lengths: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(sizes: &[usize], lengths: &[f64]) -> Result<Self, GridError> {
        let d = sizes.len();
        if d != 2 && d != 3 {
            return Err(GridError::BadDimension(d));
        }
        if lengths.len() != d {
            return Err(GridError::BadDimension(lengths.len()));
        }
        for (axis, &size) in sizes.iter().enumerate() {
            if size == 0 {
                return Err(GridError::BadSize { axis, size });
            }
        }
        for (axis, &length) in lengths.iter().enumerate() {
            if !(length > 0.0) || !length.is_finite() {
                return Err(GridError::BadLength { axis, length });
            }
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            lengths: lengths.to_vec(),
        })
    }

    /// Square 2D grid on `[0, length)^2`.
    pub fn square(k: usize, length: f64) -> Result<Self, GridError> {
        Self::new(&[k, k], &[length, length])
    }

    /// Cubic 3D grid on `[0, length)^3`.
    pub fn cube(k: usize, length: f64) -> Result<Self, GridError> {
        Self::new(&[k, k, k], &[length, length, length])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.sizes[axis] as f64
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one cell, `prod_i h_i`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Row-major linear index of a node, `k_1` slowest.
    pub fn index(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for (a, &c) in coords.iter().enumerate() {
            idx = idx * self.sizes[a] + c;
        }
        idx
    }

    /// Inverse of [`Self::index`].
    pub fn coords(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = idx % self.sizes[a];
            idx /= self.sizes[a];
        }
    }

    /// Physical position of the node with the given coordinates.
    pub fn position(&self, coords: &[usize], out: &mut [f64]) {
        for (a, &c) in coords.iter().enumerate() {
            out[a] = c as f64 * self.spacing(a);
        }
    }

    fn frequency_bounds(&self, axis: usize) -> (i64, i64) {
        let k = self.sizes[axis] as i64;
        (-(k / 2), (k - 1) / 2)
    }

    /// Signed frequency of FFT bin `j` on `axis`.
    fn bin_frequency(&self, axis: usize, j: usize) -> i64 {
        let k = self.sizes[axis] as i64;
        let j = j as i64;
        if j <= (k - 1) / 2 {
            j
        } else {
            j - k
        }
    }

    /// Fourier symbol of the periodic Laplacian at integer frequency `k`:
    /// `-4 pi^2 sum_i (k_i / L_i)^2`.
    pub fn laplacian_symbol(&self, k: &[i64]) -> Result<f64, GridError> {
        if k.len() != self.dim() {
            return Err(GridError::BadDimension(k.len()));
        }
        let mut xi_sq = 0.0;
        for (axis, &ki) in k.iter().enumerate() {
            let (lo, hi) = self.frequency_bounds(axis);
            if ki < lo || ki > hi {
                return Err(GridError::FrequencyOutOfRange { axis, k: ki, lo, hi });
            }
            let xi = ki as f64 / self.lengths[axis];
            xi_sq += xi * xi;
        }
        Ok(-4.0 * std::f64::consts::PI * std::f64::consts::PI * xi_sq)
    }
}

/// Real scalar field sampled on a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: SpectralGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &SpectralGrid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: &SpectralGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::SizeMismatch {
                got: values.len(),
                want: grid.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Fills from a function of node position.
    pub fn from_fn(grid: &SpectralGrid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let mut coords = vec![0usize; d];
        let mut pos = vec![0.0; d];
        let mut values = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            grid.coords(idx, &mut coords);
            grid.position(&coords, &mut pos);
            values.push(f(&pos));
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Cached FFT plans for one grid shape, shared by all fields on it.
///
/// Transforms run single-threaded; results are bit-reproducible for a fixed
/// input.
pub struct SpectralTransform {
    grid: SpectralGrid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl SpectralTransform {
    pub fn new(grid: &SpectralGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid
            .sizes()
            .iter()
            .map(|&k| planner.plan_fft_forward(k))
            .collect();
        let inverse = grid
            .sizes()
            .iter()
            .map(|&k| planner.plan_fft_inverse(k))
            .collect();
        Self {
            grid: grid.clone(),
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    fn fft_axis(&self, data: &mut [Complex<f64>], axis: usize, inverse: bool) {
        let sizes = self.grid.sizes();
        let k = sizes[axis];
        let plan = if inverse {
            &self.inverse[axis]
        } else {
            &self.forward[axis]
        };
        let stride: usize = sizes[axis + 1..].iter().product();
        let outer: usize = sizes[..axis].iter().product();
        if stride == 1 {
            for chunk in data.chunks_exact_mut(k) {
                plan.process(chunk);
            }
            return;
        }
        let mut line = vec![Complex::new(0.0, 0.0); k];
        let block = k * stride;
        for o in 0..outer {
            let base = o * block;
            for s in 0..stride {
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + t * stride + s];
                }
                plan.process(&mut line);
                for (t, slot) in line.iter().enumerate() {
                    data[base + t * stride + s] = *slot;
                }
            }
        }
    }

    /// Forward DFT of a real field; unscaled, full complex spectrum in the
    /// same row-major layout (bin order, not signed order).
    pub fn forward(&self, field: &ScalarField) -> Result<Vec<Complex<f64>>, GridError> {
        if field.grid() != &self.grid {
            return Err(GridError::SizeMismatch {
                got: field.values().len(),
                want: self.grid.len(),
            });
        }
        let mut data: Vec<Complex<f64>> = field
            .values()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        for axis in 0..self.grid.dim() {
            self.fft_axis(&mut data, axis, false);
        }
        Ok(data)
    }

    /// Inverse DFT scaled by `1/N`, keeping the real part.
    pub fn inverse(&self, spectrum: &[Complex<f64>]) -> Result<ScalarField, GridError> {
        if spectrum.len() != self.grid.len() {
            return Err(GridError::SizeMismatch {
                got: spectrum.len(),
                want: self.grid.len(),
            });
        }
        let mut data = spectrum.to_vec();
        for axis in 0..self.grid.dim() {
            self.fft_axis(&mut data, axis, true);
        }
        let scale = 1.0 / self.grid.len() as f64;
        let values = data.iter().map(|c| c.re * scale).collect();
        Ok(ScalarField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Signed frequency vector of the spectrum entry at linear index `idx`.
    pub fn bin_frequencies(&self, idx: usize, out: &mut [i64]) {
        let d = self.grid.dim();
        let mut coords = vec![0usize; d];
        self.grid.coords(idx, &mut coords);
        for a in 0..d {
            out[a] = self.grid.bin_frequency(a, coords[a]);
        }
    }

    /// Denominators `1 + a (4 pi^2 |xi|^2 + c)` for the screened solve below,
    /// in spectrum layout. Precompute once per coefficient pair when stepping.
    pub fn helmholtz_denominators(&self, a: f64, c: f64) -> Vec<f64> {
        let d = self.grid.dim();
        let sizes = self.grid.sizes();
        // Per-axis squared |xi| contributions, then an outer sum walk.
        let mut axis_sq: Vec<Vec<f64>> = Vec::with_capacity(d);
        for ax in 0..d {
            let l = self.grid.lengths()[ax];
            axis_sq.push(
                (0..sizes[ax])
                    .map(|j| {
                        let k = self.grid.bin_frequency(ax, j) as f64 / l;
                        k * k
                    })
                    .collect(),
            );
        }
        let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        let n = self.grid.len();
        let mut out = Vec::with_capacity(n);
        let mut coords = vec![0usize; d];
        for idx in 0..n {
            self.grid.coords(idx, &mut coords);
            let xi_sq: f64 = (0..d).map(|ax| axis_sq[ax][coords[ax]]).sum();
            out.push(1.0 + a * (four_pi_sq * xi_sq + c));
        }
        out
    }

    /// Solves `(I - a (Laplacian - c I)) v = field` on the periodic grid,
    /// mode-wise. Requires `a >= 0` and `c >= 0`; the denominators are then
    /// at least 1 and the solve is a max-norm contraction.
    pub fn apply_helmholtz_inverse(
        &self,
        field: &ScalarField,
        a: f64,
        c: f64,
    ) -> Result<ScalarField, GridError> {
        let denominators = self.helmholtz_denominators(a, c);
        self.apply_helmholtz_with(field, &denominators)
    }

    /// Same solve with precomputed denominators.
    pub fn apply_helmholtz_with(
        &self,
        field: &ScalarField,
        denominators: &[f64],
    ) -> Result<ScalarField, GridError> {
        let mut spectrum = self.forward(field)?;
        if denominators.len() != spectrum.len() {
            return Err(GridError::SizeMismatch {
                got: denominators.len(),
                want: spectrum.len(),
            });
        }
        for (c, d) in spectrum.iter_mut().zip(denominators) {
            *c /= d;
        }
        self.inverse(&spectrum)
    }
}
