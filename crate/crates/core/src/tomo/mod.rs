//! Parallel-beam tomography. A ray `(theta, t)` is the line
//! `{x : x . (cos theta, sin theta) = t}`, `theta` in `[0, pi)`; samples sit at
//! `(j - (n - 1) / 2) delta` on every axis.

mod backproject;
mod bst;
mod fbp;
mod radon;

pub use backproject::backproject_direct;
pub use bst::backproject_bst;
pub use fbp::{ramp_filter_rows, recon_fbp, recon_fbp_with, Backprojector};
pub use radon::radon;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

#[inline]
pub fn centered(j: usize, n: usize, delta: f64) -> f64 {
    (j as f64 - 0.5 * (n as f64 - 1.0)) * delta
}

/// Reconstruction on square pixels; `fov_radius` is half the shorter side.
#[derive(Debug, Clone)]
pub struct Slice {
    data: Array2<f64>,
    grid: Grid2D,
    fov_radius: f64,
}

impl Slice {
    pub fn new(data: Array2<f64>, delta: f64) -> Result<Self> {
        let (ny, nx) = data.dim();
        let grid = Grid2D::new(nx, ny, delta)?;
        if let Some((i, _)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let fov_radius = 0.5 * nx.min(ny) as f64 * delta;
        Ok(Self { data: data.as_standard_layout().into_owned(), grid, fov_radius })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::new(Array2::zeros(grid.shape()), grid.delta()).expect("zeros are finite")
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn fov_radius(&self) -> f64 {
        self.fov_radius
    }

    /// Pixel-centre radius of `[row, col]`.
    pub fn radius(&self, row: usize, col: usize) -> f64 {
        let d = self.grid.delta();
        centered(col, self.grid.nx(), d).hypot(centered(row, self.grid.ny(), d))
    }
}
