//! Backprojection through the backprojection-slice relation
//! `FT[B g](sigma xi_theta) = FT_t[g](sigma, theta) / |sigma|`.
//!
//! Gridding the `1/|sigma|` weighted spectrum directly aliases the slowly
//! decaying part of `B g` back into the field of view, so the band below
//! `SPLIT / fov` is backprojected directly on a coarse grid and spline
//! interpolated; only the complementary band is gridded.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use super::backproject::lerp_row;
use super::{centered, Slice};
use crate::fft;
use crate::filters::Sinogram;
use crate::grid::{bin_freq, Grid2D};

const SPLIT: f64 = 8.0;
const COARSE: usize = 33;
const OVERSAMPLE: usize = 2;

pub fn backproject_bst(g: &Sinogram, out: Grid2D) -> Slice {
    let (na, nt) = g.data().dim();
    let dt = g.t_grid().delta();
    let fov = out.nx().max(out.ny()) as f64 * out.delta();
    let pad = (4 * nt).next_power_of_two();

    let spec = padded_row_spectra(g.data(), pad);
    let s0 = SPLIT / fov;
    let mut low_spec = spec.clone();
    for row in low_spec.rows_mut() {
        for (k, z) in row.into_iter().enumerate() {
            *z *= (-(bin_freq(k, pad, dt) / s0).powi(2)).exp();
        }
    }
    let low_full = fft::ifft_rows(low_spec);
    let low = Array2::from_shape_fn((na, nt), |(a, j)| low_full[[a, j]].re);
    let high = g.data() - &low;

    let mut img = coarse_direct(&low, g, out);
    img += &gridded(&high, g, out, pad);
    Slice::new(img, out.delta()).expect("finite sinogram gives finite image")
}

fn padded_row_spectra(x: &Array2<f64>, pad: usize) -> Array2<Complex64> {
    let (na, nt) = x.dim();
    let mut p = Array2::<f64>::zeros((na, pad));
    p.slice_mut(ndarray::s![.., ..nt]).assign(x);
    fft::fft_rows(p.view())
}

fn coarse_direct(low: &Array2<f64>, g: &Sinogram, out: Grid2D) -> Array2<f64> {
    let (ny, nx) = out.shape();
    let d = out.delta();
    let dt = g.t_grid().delta();
    let axis = |n: usize| -> Vec<f64> {
        let (a, b) = (centered(0, n, d), centered(n - 1, n, d));
        (0..COARSE).map(|i| a + (b - a) * i as f64 / (COARSE - 1) as f64).collect()
    };
    let (xc, yc) = (axis(nx), axis(ny));
    let weights = g.angle_weights();
    let trig: Vec<(f64, f64)> = g.angles().iter().map(|a| (a.cos(), a.sin())).collect();
    let coarse = Array2::from_shape_fn((COARSE, COARSE), |(r, c)| {
        trig.iter()
            .zip(&weights)
            .enumerate()
            .map(|(k, (&(cs, sn), &w))| w * lerp_row(low.row(k).as_slice().unwrap(), xc[c] * cs + yc[r] * sn, dt))
            .sum::<f64>()
    });
    let wy = spline_matrix(COARSE, ny);
    let wx = spline_matrix(COARSE, nx);
    wy.dot(&coarse).dot(&wx.t())
}

/// `n x m` matrix evaluating the natural cubic spline through `m` equally
/// spaced knots at `n` equally spaced points spanning the same interval.
fn spline_matrix(m: usize, n: usize) -> Array2<f64> {
    let mut w = Array2::<f64>::zeros((n, m));
    for k in 0..m {
        let mut y = vec![0.0; m];
        y[k] = 1.0;
        let m2 = natural_second_derivatives(&y);
        for i in 0..n {
            let u = i as f64 * (m - 1) as f64 / (n - 1) as f64;
            let j = (u.floor() as usize).min(m - 2);
            let t = u - j as f64;
            let a = 1.0 - t;
            w[[i, k]] = a * y[j] + t * y[j + 1] + ((a * a * a - a) * m2[j] + (t * t * t - t) * m2[j + 1]) / 6.0;
        }
    }
    w
}

fn natural_second_derivatives(y: &[f64]) -> Vec<f64> {
    let m = y.len();
    let mut d = vec![0.0; m];
    if m < 3 {
        return d;
    }
    // tridiagonal (1, 4, 1) system for interior knots, unit spacing
    let k = m - 2;
    let rhs: Vec<f64> = (1..m - 1).map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1])).collect();
    let mut c = vec![0.0; k];
    let mut r = vec![0.0; k];
    c[0] = 1.0 / 4.0;
    r[0] = rhs[0] / 4.0;
    for i in 1..k {
        let den = 4.0 - c[i - 1];
        c[i] = 1.0 / den;
        r[i] = (rhs[i] - r[i - 1]) / den;
    }
    d[k] = r[k - 1];
    for i in (0..k - 1).rev() {
        d[i + 1] = r[i] - c[i] * d[i + 2];
    }
    d
}

fn gridded(high: &Array2<f64>, g: &Sinogram, out: Grid2D, pad: usize) -> Array2<f64> {
    let (na, nt) = high.dim();
    let dt = g.t_grid().delta();
    let angles = g.angles();
    let ct = 0.5 * (nt as f64 - 1.0);
    let dsig = 1.0 / (pad as f64 * dt);

    // continuous-normalized row spectra, reordered to ascending sigma
    let raw = padded_row_spectra(high, pad);
    let norm = dt * (pad as f64).sqrt();
    let mut rows = Array2::<Complex64>::zeros((na, pad));
    for (a, mut dst) in rows.axis_iter_mut(Axis(0)).enumerate() {
        for k in 0..pad {
            let s = bin_freq(k, pad, dt);
            let idx = (s / dsig).round() as isize + (pad / 2) as isize;
            dst[idx as usize] = raw[[a, k]] * norm * Complex64::from_polar(1.0, 2.0 * PI * s * ct * dt);
        }
    }
    let row_at = |a: usize, s: f64| -> Complex64 {
        let u = s / dsig + (pad / 2) as f64;
        if !(u >= 0.0 && u <= (pad - 1) as f64) {
            return Complex64::new(0.0, 0.0);
        }
        let i = (u.floor() as usize).min(pad - 2);
        let f = u - i as f64;
        rows[[a, i]] * (1.0 - f) + rows[[a, i + 1]] * f
    };
    let polar = |q1: f64, q2: f64| -> Complex64 {
        let rho = q1.hypot(q2);
        if rho == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut th = q2.atan2(q1);
        let mut sig = rho;
        if th < 0.0 {
            th += PI;
            sig = -sig;
        }
        if th >= PI {
            th -= PI;
            sig = -sig;
        }
        let k = angles.partition_point(|&a| a <= th);
        let v = if k == 0 {
            let (a0, a1) = (angles[na - 1] - PI, angles[0]);
            let f = (th - a0) / (a1 - a0);
            row_at(na - 1, -sig) * (1.0 - f) + row_at(0, sig) * f
        } else if k == na {
            let (a0, a1) = (angles[na - 1], angles[0] + PI);
            let f = (th - a0) / (a1 - a0);
            row_at(na - 1, sig) * (1.0 - f) + row_at(0, -sig) * f
        } else {
            let (a0, a1) = (angles[k - 1], angles[k]);
            let f = (th - a0) / (a1 - a0);
            row_at(k - 1, sig) * (1.0 - f) + row_at(k, sig) * f
        };
        v / rho
    };

    let (ny, nx) = out.shape();
    let d = out.delta();
    let (mx, my) = (OVERSAMPLE * nx, OVERSAMPLE * ny);
    let (cx, cy) = (0.5 * (mx as f64 - 1.0), 0.5 * (my as f64 - 1.0));
    let mut cart = Array2::<Complex64>::zeros((my, mx));
    cart.as_slice_mut().unwrap().par_chunks_mut(mx).enumerate().for_each(|(r, row)| {
        let q2 = bin_freq(r, my, d);
        for (c, z) in row.iter_mut().enumerate() {
            let q1 = bin_freq(c, mx, d);
            *z = polar(q1, q2) * Complex64::from_polar(1.0, -2.0 * PI * (q1 * cx + q2 * cy) * d);
        }
    });
    let img = fft::ifft2(cart);
    let scale = ((mx * my) as f64).sqrt() / (mx as f64 * d * my as f64 * d);
    let (ox, oy) = ((mx - nx) / 2, (my - ny) / 2);
    Array2::from_shape_fn((ny, nx), |(r, c)| img[[r + oy, c + ox]].re * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_knots_and_lines() {
        let w = spline_matrix(9, 33);
        // output i = 4k lands on knot k
        for k in 0..9 {
            for j in 0..9 {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((w[[4 * k, j]] - want).abs() < 1e-14);
            }
        }
        let line: Vec<f64> = (0..9).map(|k| 2.0 * k as f64 - 3.0).collect();
        for i in 0..33 {
            let v: f64 = (0..9).map(|j| w[[i, j]] * line[j]).sum();
            let u = i as f64 * 8.0 / 32.0;
            assert!((v - (2.0 * u - 3.0)).abs() < 1e-12);
        }
    }
}
