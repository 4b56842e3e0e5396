//! Uniform sample grids, their DFT frequency axes, and cutoff masks.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::BadDelta(delta))
    }
}

/// Cyclic frequency of DFT bin `j` for `n` samples spaced `delta` apart,
/// in the usual `[0, 1, .., -2, -1] / (n delta)` layout.
#[inline]
pub fn bin_freq(j: usize, n: usize, delta: f64) -> f64 {
    let k = if j < (n + 1) / 2 { j as f64 } else { j as f64 - n as f64 };
    k / (n as f64 * delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    delta: f64,
}

impl Grid1D {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        check_delta(delta)?;
        Ok(Self { n, delta })
    }

    /// `n` samples covering `[-half_width, half_width)`.
    pub fn spanning(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, 2.0 * half_width / n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> f64 {
        self.n as f64 * self.delta
    }

    /// Sample positions `(j - n/2) delta`; index `n/2` sits at the origin.
    pub fn coords(&self) -> Vec<f64> {
        let c = (self.n / 2) as f64;
        (0..self.n).map(|j| (j as f64 - c) * self.delta).collect()
    }

    pub fn freq(&self, j: usize) -> f64 {
        bin_freq(j, self.n, self.delta)
    }

    pub fn freq_axis(&self) -> Vec<f64> {
        freq_axis(self)
    }

    pub fn apply_mask(&self, spectrum: &[Complex64], mask: CutoffMask) -> Result<Vec<Complex64>> {
        if spectrum.len() != self.n {
            return Err(Error::Shape { expected: vec![self.n], got: vec![spectrum.len()] });
        }
        let qc = mask.q_c(self.delta);
        Ok(spectrum
            .iter()
            .enumerate()
            .map(|(j, &z)| if admits(self.freq(j).abs(), qc) { z } else { Complex64::new(0.0, 0.0) })
            .collect())
    }
}

pub fn freq_axis(grid: &Grid1D) -> Vec<f64> {
    (0..grid.n).map(|j| grid.freq(j)).collect()
}

/// Square-pixel grid; arrays are indexed `[row, col]` with `ny` rows.
/// `q1` is the frequency along columns (axis 1), `q2` along rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    delta: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, delta: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::GridTooSmall(nx.min(ny)));
        }
        check_delta(delta)?;
        Ok(Self { nx, ny, delta })
    }

    pub fn square(n: usize, delta: f64) -> Result<Self> {
        Self::new(n, n, delta)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn cell_area(&self) -> f64 {
        self.delta * self.delta
    }

    pub fn x_axis(&self) -> Grid1D {
        Grid1D { n: self.nx, delta: self.delta }
    }

    pub fn y_axis(&self) -> Grid1D {
        Grid1D { n: self.ny, delta: self.delta }
    }

    /// Frequency vector `(q1, q2)` of bin `[row, col]`.
    #[inline]
    pub fn q(&self, row: usize, col: usize) -> [f64; 2] {
        [bin_freq(col, self.nx, self.delta), bin_freq(row, self.ny, self.delta)]
    }

    pub fn check_shape(&self, shape: &[usize]) -> Result<()> {
        if shape != [self.ny, self.nx] {
            return Err(Error::Shape { expected: vec![self.ny, self.nx], got: shape.to_vec() });
        }
        Ok(())
    }

    pub fn apply_mask(&self, spectrum: &Array2<Complex64>, mask: CutoffMask) -> Result<Array2<Complex64>> {
        self.check_shape(spectrum.shape())?;
        let qc = mask.q_c(self.delta);
        let mut out = spectrum.clone();
        for ((r, c), z) in out.indexed_iter_mut() {
            let [q1, q2] = self.q(r, c);
            if !admits(q1.abs().max(q2.abs()), qc) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }
}

/// Frequency cutoff `q_c = m / (2 delta)`; `m >= 1` keeps every DFT bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffMask {
    m: f64,
}

impl CutoffMask {
    pub fn new(m: f64) -> Result<Self> {
        if m > 0.0 && !m.is_nan() {
            Ok(Self { m })
        } else {
            Err(Error::BadCutoff(m))
        }
    }

    pub fn full() -> Self {
        Self { m: f64::INFINITY }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn q_c(&self, delta: f64) -> f64 {
        self.m / (2.0 * delta)
    }

    pub fn is_full(&self) -> bool {
        self.m >= 1.0
    }

    /// Whether a frequency of (infinity-norm) magnitude `q_abs` passes.
    pub fn admits(&self, q_abs: f64, delta: f64) -> bool {
        admits(q_abs, self.q_c(delta))
    }
}

impl Default for CutoffMask {
    fn default() -> Self {
        Self::full()
    }
}

#[inline]
pub(crate) fn admits(q_abs: f64, qc: f64) -> bool {
    q_abs <= qc * (1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_axis() {
        let g = Grid1D::new(2, 1.0).unwrap();
        assert_eq!(g.freq_axis(), vec![0.0, -0.5]);
    }

    #[test]
    fn four_point_axis() {
        let g = Grid1D::new(4, 0.5).unwrap();
        assert_eq!(g.freq_axis(), vec![0.0, 0.5, -1.0, -0.5]);
    }

    #[test]
    fn fine_axis_matches_index_enumeration() {
        let g = Grid1D::new(1024, 1e-3).unwrap();
        let ax = g.freq_axis();
        // independent enumeration: bins 0..=511 positive, 512..1023 wrap to k - 1024
        for (j, s) in ax.iter().enumerate() {
            let k = if j <= 511 { j as i64 } else { j as i64 - 1024 };
            assert_eq!(*s, k as f64 / 1.024);
        }
        let max_pos = ax.iter().cloned().fold(f64::MIN, f64::max);
        let max_abs = ax.iter().map(|s| s.abs()).fold(0.0, f64::max);
        assert!((max_pos - (500.0 - 1.0 / 1.024)).abs() < 1e-9);
        assert!((max_abs - 500.0).abs() < 1e-9);
    }

    #[test]
    fn odd_axis_symmetric() {
        let g = Grid1D::new(5, 1.0).unwrap();
        assert_eq!(g.freq_axis(), vec![0.0, 0.2, 0.4, -0.4, -0.2]);
    }

    #[test]
    fn bad_grids() {
        assert_eq!(Grid1D::new(1, 1.0), Err(Error::GridTooSmall(1)));
        assert!(Grid1D::new(4, 0.0).is_err());
        assert!(Grid2D::new(4, 4, f64::NAN).is_err());
        assert!(CutoffMask::new(0.0).is_err());
        assert!(CutoffMask::new(-1.0).is_err());
    }

    #[test]
    fn mask_survivors_n8() {
        let g = Grid1D::new(8, 1.0).unwrap();
        let spec = vec![Complex64::new(1.0, 0.0); 8];
        let masked = g.apply_mask(&spec, CutoffMask::new(0.5).unwrap()).unwrap();
        let mut kept: Vec<f64> = (0..8).filter(|&j| masked[j].re != 0.0).map(|j| g.freq(j)).collect();
        kept.sort_by(f64::total_cmp);
        assert_eq!(kept, vec![-0.25, -0.125, 0.0, 0.125, 0.25]);
    }

    #[test]
    fn mask_tiny_cutoff_keeps_dc() {
        let g = Grid2D::new(6, 4, 0.3).unwrap();
        let spec = Array2::from_elem((4, 6), Complex64::new(2.0, -1.0));
        let masked = g.apply_mask(&spec, CutoffMask::new(1e-9).unwrap()).unwrap();
        for ((r, c), z) in masked.indexed_iter() {
            if r == 0 && c == 0 {
                assert_eq!(*z, Complex64::new(2.0, -1.0));
            } else {
                assert_eq!(*z, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn mask_shape_mismatch() {
        let g = Grid2D::new(6, 4, 0.3).unwrap();
        let spec = Array2::from_elem((6, 4), Complex64::new(0.0, 0.0));
        assert!(matches!(g.apply_mask(&spec, CutoffMask::full()), Err(Error::Shape { .. })));
    }
}
