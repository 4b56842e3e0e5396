//! Unitary DFT helpers (forward `e^{-2 pi i j k / n}`, both directions
//! scaled by `1/sqrt(n)`) and real-valued spectral multipliers built on them.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::{bin_freq, Grid1D, Grid2D};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft(n, dir)
}

/// Transforms every contiguous length-`n` chunk of `buf` in place.
fn rows_in_place(buf: &mut [Complex64], n: usize, dir: FftDirection) {
    let fft = plan(n, dir);
    let scale = 1.0 / (n as f64).sqrt();
    let scratch_len = fft.get_inplace_scratch_len();
    buf.par_chunks_mut(n).for_each_init(
        || vec![ZERO; scratch_len],
        |scratch, row| {
            fft.process_with_scratch(row, scratch);
            row.iter_mut().for_each(|z| *z *= scale);
        },
    );
}

pub fn fft1(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    rows_in_place(&mut buf, x.len(), FftDirection::Forward);
    buf
}

pub fn ifft1(mut spec: Vec<Complex64>) -> Vec<Complex64> {
    let n = spec.len();
    rows_in_place(&mut spec, n, FftDirection::Inverse);
    spec
}

/// Forward transform of each row (along axis 1).
pub fn fft_rows(x: ArrayView2<f64>) -> Array2<Complex64> {
    let mut out = x.mapv(|v| Complex64::new(v, 0.0));
    let n = out.ncols();
    rows_in_place(out.as_slice_mut().expect("standard layout"), n, FftDirection::Forward);
    out
}

pub fn ifft_rows(spec: Array2<Complex64>) -> Array2<Complex64> {
    let n = spec.ncols();
    let mut spec = if spec.is_standard_layout() { spec } else { spec.as_standard_layout().into_owned() };
    rows_in_place(spec.as_slice_mut().expect("standard layout"), n, FftDirection::Inverse);
    spec
}

fn transform2(mut a: Array2<Complex64>, dir: FftDirection) -> Array2<Complex64> {
    let (ny, nx) = a.dim();
    if !a.is_standard_layout() {
        a = a.as_standard_layout().into_owned();
    }
    rows_in_place(a.as_slice_mut().unwrap(), nx, dir);
    let mut t = a.t().as_standard_layout().into_owned();
    rows_in_place(t.as_slice_mut().unwrap(), ny, dir);
    t.t().as_standard_layout().into_owned()
}

pub fn fft2(x: ArrayView2<f64>) -> Array2<Complex64> {
    transform2(x.mapv(|v| Complex64::new(v, 0.0)), FftDirection::Forward)
}

pub fn fft2_complex(x: Array2<Complex64>) -> Array2<Complex64> {
    transform2(x, FftDirection::Forward)
}

pub fn ifft2(spec: Array2<Complex64>) -> Array2<Complex64> {
    transform2(spec, FftDirection::Inverse)
}

/// `IFFT(w(q) FFT(x))` on a 2D grid, returning the complex result so callers
/// can inspect the imaginary residue.
pub fn multiply2_complex<W>(x: ArrayView2<f64>, grid: &Grid2D, w: W) -> Array2<Complex64>
where
    W: Fn([f64; 2]) -> f64 + Sync,
{
    let mut spec = fft2(x);
    scale2(&mut spec, grid, w);
    ifft2(spec)
}

pub fn multiply2<W>(x: ArrayView2<f64>, grid: &Grid2D, w: W) -> Array2<f64>
where
    W: Fn([f64; 2]) -> f64 + Sync,
{
    multiply2_complex(x, grid, w).mapv(|z| z.re)
}

pub(crate) fn scale2<W>(spec: &mut Array2<Complex64>, grid: &Grid2D, w: W)
where
    W: Fn([f64; 2]) -> f64 + Sync,
{
    let nx = spec.ncols();
    spec.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(r, row)| {
            for (c, z) in row.iter_mut().enumerate() {
                *z *= w(grid.q(r, c));
            }
        });
}

/// Row-wise `IFFT(w(sigma) FFT(row))` with `sigma` on `t`.
pub fn multiply_rows<W>(x: ArrayView2<f64>, t: &Grid1D, w: W) -> Array2<f64>
where
    W: Fn(f64) -> f64 + Sync,
{
    let mut spec = fft_rows(x);
    scale_rows(&mut spec, t, w);
    ifft_rows(spec).mapv(|z| z.re)
}

pub(crate) fn scale_rows<W>(spec: &mut Array2<Complex64>, t: &Grid1D, w: W)
where
    W: Fn(f64) -> f64 + Sync,
{
    let weights: Vec<f64> = (0..t.n()).map(|j| w(t.freq(j))).collect();
    let n = t.n();
    spec.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(n)
        .for_each(|row| row.iter_mut().zip(&weights).for_each(|(z, &k)| *z *= k));
}

pub fn multiply1<W>(x: &[f64], grid: &Grid1D, w: W) -> Vec<f64>
where
    W: Fn(f64) -> f64,
{
    let mut spec = fft1(x);
    for (j, z) in spec.iter_mut().enumerate() {
        *z *= w(bin_freq(j, grid.n(), grid.delta()));
    }
    ifft1(spec).into_iter().map(|z| z.re).collect()
}

/// `4 pi^2 |q|^2`, the symbol of `-laplacian`.
#[inline]
pub fn lap_symbol(q: [f64; 2]) -> f64 {
    4.0 * PI * PI * (q[0] * q[0] + q[1] * q[1])
}

pub fn laplacian2(x: ArrayView2<f64>, grid: &Grid2D) -> Array2<f64> {
    multiply2(x, grid, |q| -lap_symbol(q))
}

pub fn laplacian1(x: &[f64], grid: &Grid1D) -> Vec<f64> {
    multiply1(x, grid, |s| -4.0 * PI * PI * s * s)
}

/// Second derivative along each row.
pub fn d2_rows(x: ArrayView2<f64>, t: &Grid1D) -> Array2<f64> {
    multiply_rows(x, t, |s| -4.0 * PI * PI * s * s)
}
