use ndarray::Array2;
use rayon::prelude::*;

use super::{centered, Slice};
use crate::error::{Error, Result};
use crate::filters::Sinogram;
use crate::grid::Grid1D;

/// Bilinear sample with zero outside the outermost pixel centres.
#[inline]
pub(crate) fn bilinear(img: &Array2<f64>, x: f64, y: f64, delta: f64) -> f64 {
    let (ny, nx) = img.dim();
    let u = x / delta + 0.5 * (nx as f64 - 1.0);
    let v = y / delta + 0.5 * (ny as f64 - 1.0);
    if !(u > -1.0 && v > -1.0 && u < nx as f64 && v < ny as f64) {
        return 0.0;
    }
    let (c0, r0) = (u.floor(), v.floor());
    let (fu, fv) = (u - c0, v - r0);
    let (c0, r0) = (c0 as isize, r0 as isize);
    let at = |r: isize, c: isize| {
        if r < 0 || c < 0 || r >= ny as isize || c >= nx as isize {
            0.0
        } else {
            img[[r as usize, c as usize]]
        }
    };
    (1.0 - fv) * ((1.0 - fu) * at(r0, c0) + fu * at(r0, c0 + 1)) + fv * ((1.0 - fu) * at(r0 + 1, c0) + fu * at(r0 + 1, c0 + 1))
}

/// Line integrals by ray marching with step `delta / 2` (midpoint rule).
pub fn radon(s: &Slice, angles: &[f64], t_grid: Grid1D) -> Result<Sinogram> {
    if angles.is_empty() {
        return Err(Error::Angles);
    }
    let g = s.grid();
    let delta = g.delta();
    let half_diag = 0.5 * delta * ((g.nx() * g.nx() + g.ny() * g.ny()) as f64).sqrt() + delta;
    let steps = (4.0 * half_diag / delta).ceil() as usize;
    let h = 2.0 * half_diag / steps as f64;
    let nt = t_grid.n();
    let img = s.data();
    let rows: Vec<Vec<f64>> = angles
        .par_iter()
        .map(|&th| {
            let (c, sn) = (th.cos(), th.sin());
            (0..nt)
                .map(|j| {
                    let t = centered(j, nt, t_grid.delta());
                    (0..steps)
                        .map(|k| {
                            let tau = -half_diag + (k as f64 + 0.5) * h;
                            bilinear(img, t * c - tau * sn, t * sn + tau * c, delta)
                        })
                        .sum::<f64>()
                        * h
                })
                .collect()
        })
        .collect();
    let data = Array2::from_shape_vec((angles.len(), nt), rows.concat()).expect("rows have nt entries");
    Sinogram::new(data, t_grid.delta(), angles.to_vec())
}
