use ndarray::Array2;
use rayon::prelude::*;

use super::{centered, Slice};
use crate::filters::Sinogram;
use crate::grid::Grid2D;

/// Linear interpolation of a row sampled at centred positions; zero outside.
#[inline]
pub(crate) fn lerp_row(row: &[f64], t: f64, dt: f64) -> f64 {
    let n = row.len();
    let u = t / dt + 0.5 * (n as f64 - 1.0);
    if !(u > -1.0 && u < n as f64) {
        return 0.0;
    }
    let i = u.floor();
    let f = u - i;
    let i = i as isize;
    let at = |k: isize| if k < 0 || k >= n as isize { 0.0 } else { row[k as usize] };
    (1.0 - f) * at(i) + f * at(i + 1)
}

/// `B[g](x) = sum_theta w_theta g(x . xi_theta, theta)`.
pub fn backproject_direct(g: &Sinogram, out: Grid2D) -> Slice {
    let (ny, nx) = out.shape();
    let d = out.delta();
    let dt = g.t_grid().delta();
    let weights = g.angle_weights();
    let trig: Vec<(f64, f64)> = g.angles().iter().map(|a| (a.cos(), a.sin())).collect();
    let data = g.data();
    let mut img = Array2::<f64>::zeros((ny, nx));
    img.as_slice_mut()
        .expect("fresh array")
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(r, row)| {
            let y = centered(r, ny, d);
            for (c, px) in row.iter_mut().enumerate() {
                let x = centered(c, nx, d);
                *px = trig
                    .iter()
                    .zip(&weights)
                    .enumerate()
                    .map(|(k, (&(cs, sn), &w))| w * lerp_row(data.row(k).as_slice().unwrap(), x * cs + y * sn, dt))
                    .sum();
            }
        });
    Slice::new(img, d).expect("finite sinogram gives finite image")
}
