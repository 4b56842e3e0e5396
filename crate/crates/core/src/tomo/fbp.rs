use std::f64::consts::PI;

use ndarray::{s, Array2};

use super::{backproject_bst, backproject_direct, Slice};
use crate::fft;
use crate::filters::{smooth_rows, Sinogram};
use crate::grid::{CutoffMask, Grid2D};
use crate::kernels::Ell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backprojector {
    #[default]
    Direct,
    Bst,
}

impl Backprojector {
    pub fn apply(self, g: &Sinogram, out: Grid2D) -> Slice {
        match self {
            Self::Direct => backproject_direct(g, out),
            Self::Bst => backproject_bst(g, out),
        }
    }
}

/// Ram-Lak ramp along each row, evaluated as a linear convolution on rows
/// zero-padded to the next power of two at least twice their length.
pub fn ramp_filter_rows(g: &Sinogram) -> Array2<f64> {
    let (na, nt) = g.data().dim();
    let dt = g.t_grid().delta();
    let p = (2 * nt).next_power_of_two();
    let h: Vec<f64> = (0..p)
        .map(|j| {
            let k = if j <= p / 2 { j as i64 } else { j as i64 - p as i64 };
            match k {
                0 => 1.0 / (4.0 * dt * dt),
                k if k % 2 != 0 => -1.0 / (PI * PI * (k * k) as f64 * dt * dt),
                _ => 0.0,
            }
        })
        .collect();
    let scale = dt * (p as f64).sqrt();
    let w: Vec<f64> = fft::fft1(&h).into_iter().map(|z| z.re * scale).collect();

    let mut padded = Array2::<f64>::zeros((na, p));
    padded.slice_mut(s![.., ..nt]).assign(g.data());
    let mut spec = fft::fft_rows(padded.view());
    for mut row in spec.rows_mut() {
        row.iter_mut().zip(&w).for_each(|(z, &k)| *z *= k);
    }
    let filtered = fft::ifft_rows(spec);
    filtered.slice(s![.., ..nt]).mapv(|z| z.re)
}

/// `f_ell = B[ramp * T_ell * g]` with direct backprojection.
pub fn recon_fbp(g: &Sinogram, ell: Ell, out: Grid2D, mask: CutoffMask) -> Slice {
    recon_fbp_with(g, ell, out, mask, Backprojector::Direct)
}

pub fn recon_fbp_with(g: &Sinogram, ell: Ell, out: Grid2D, mask: CutoffMask, bp: Backprojector) -> Slice {
    let smoothed = smooth_rows(g.data(), g.t_grid(), ell, mask);
    let smoothed = g.with_data(smoothed).expect("smoothing keeps shape and finiteness");
    let ramped = ramp_filter_rows(&smoothed);
    let ramped = g.with_data(ramped).expect("filtering keeps shape and finiteness");
    bp.apply(&ramped, out)
}
