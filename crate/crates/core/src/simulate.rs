//! Synthetic phantoms and the `(-L lap + 1) e^{-p}` forward model.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft;
use crate::filters::{Frame, Profile};
use crate::grid::{Grid1D, Grid2D};
use crate::select::PhysicalParams;
use crate::tomo::{centered, Slice};

/// Smoothed rectangle of width 1: `p = (s(t + 1/2) - s(t - 1/2)) / (2 w)` with
/// `s(t) = t / sqrt(t^2 + 1/n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phantom1D {
    pub w: f64,
    pub n: f64,
    pub grid: Grid1D,
}

impl Phantom1D {
    pub fn new(w: f64, n: f64, grid: Grid1D) -> Result<Self> {
        if !(w > 0.0) {
            return Err(Error::NotPositive { what: "w", value: w });
        }
        if !(n > 0.0) {
            return Err(Error::NotPositive { what: "n", value: n });
        }
        Ok(Self { w, n, grid })
    }

    /// 4096 samples on `[-2, 2)`.
    pub fn default_grid() -> Grid1D {
        Grid1D::spanning(4096, 2.0).expect("static grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectPhantom {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub d2p: Vec<f64>,
}

pub fn rect_phantom(ph: &Phantom1D) -> Result<RectPhantom> {
    let t = ph.grid.coords();
    if t[0] > -1.0 || t[t.len() - 1] < 1.0 {
        return Err(Error::GridTooNarrow);
    }
    let e = 1.0 / ph.n;
    let s = |x: f64| x / (x * x + e).sqrt();
    let s1 = |x: f64| e / (x * x + e).powf(1.5);
    let s2 = |x: f64| -3.0 * x * e / (x * x + e).powf(2.5);
    let k = 1.0 / (2.0 * ph.w);
    let p = t.iter().map(|&x| k * (s(x + 0.5) - s(x - 0.5))).collect();
    let dp = t.iter().map(|&x| k * (s1(x + 0.5) - s1(x - 0.5))).collect();
    let d2p = t.iter().map(|&x| k * (s2(x + 0.5) - s2(x - 0.5))).collect();
    Ok(RectPhantom { t, p, dp, d2p })
}

fn check_l(l: f64) -> Result<()> {
    if l >= 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeEll(l))
    }
}

/// Chain-rule form `(L (p'' - p'^2) + 1) e^{-p}`.
pub fn propagate_1d(p: &[f64], dp: &[f64], d2p: &[f64], l: f64) -> Result<Vec<f64>> {
    check_l(l)?;
    if dp.len() != p.len() || d2p.len() != p.len() {
        return Err(Error::Shape { expected: vec![p.len()], got: vec![dp.len(), d2p.len()] });
    }
    Ok(p.iter()
        .zip(dp)
        .zip(d2p)
        .map(|((&p, &d1), &d2)| (l * (d2 - d1 * d1) + 1.0) * (-p).exp())
        .collect())
}

/// `(-L d^2 + 1) e^{-p}` applied in frequency space.
pub fn propagate_1d_spectral(p: &[f64], grid: &Grid1D, l: f64) -> Result<Vec<f64>> {
    check_l(l)?;
    let u: Vec<f64> = p.iter().map(|v| (-v).exp()).collect();
    Ok(fft::multiply1(&u, grid, |s| 1.0 + 4.0 * PI * PI * l * s * s))
}

fn first_nonpositive<'a>(it: impl Iterator<Item = &'a f64>) -> Option<(usize, f64)> {
    it.enumerate().find(|(_, v)| !(**v > 0.0)).map(|(i, &v)| (i, v))
}

/// Rect-phantom intensity profile at distance parameter `L`.
pub fn simulate_profile(ph: &RectPhantom, grid: &Grid1D, l: f64) -> Result<Profile> {
    let i = propagate_1d(&ph.p, &ph.dp, &ph.d2p, l)?;
    if let Some((index, value)) = first_nonpositive(i.iter()) {
        return Err(Error::Propagation { index, value });
    }
    Profile::new(i, grid.delta())
}

pub fn propagate_2d(p: &Array2<f64>, delta: f64, l: f64) -> Result<Frame> {
    check_l(l)?;
    let (ny, nx) = p.dim();
    let grid = Grid2D::new(nx, ny, delta)?;
    if let Some((i, _)) = p.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let u = p.mapv(|v| (-v).exp());
    let f = fft::multiply2(u.view(), &grid, |q| 1.0 + l * fft::lap_symbol(q));
    if let Some((index, value)) = first_nonpositive(f.iter()) {
        return Err(Error::Propagation { index, value });
    }
    Frame::new(f, delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    distances: Vec<f64>,
    params: PhysicalParams,
}

impl DistanceSeries {
    pub fn new(distances: Vec<f64>, params: PhysicalParams) -> Result<Self> {
        let ok = distances.len() >= 2
            && distances[0] > 0.0
            && distances.windows(2).all(|w| w[0] < w[1])
            && distances.iter().all(|d| d.is_finite());
        if !ok {
            return Err(Error::Invalid("need at least 2 positive, strictly increasing distances".into()));
        }
        Ok(Self { distances, params })
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn ls(&self) -> Vec<f64> {
        self.distances.iter().map(|&d| self.params.at_distance(d).map(|p| p.l()).unwrap_or(f64::NAN)).collect()
    }
}

pub fn distance_series(p: &Array2<f64>, delta: f64, series: &DistanceSeries) -> Result<Vec<Frame>> {
    series.ls().par_iter().map(|&l| propagate_2d(p, delta, l)).collect()
}

pub fn distance_series_1d(ph: &RectPhantom, grid: &Grid1D, series: &DistanceSeries) -> Result<Vec<Profile>> {
    series.ls().par_iter().map(|&l| simulate_profile(ph, grid, l)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
    pub value: f64,
}

/// Sum of indicator disks sampled at pixel centres.
pub fn disk_phantom_2d(grid: &Grid2D, disks: &[Disk]) -> Slice {
    let (ny, nx) = grid.shape();
    let d = grid.delta();
    let data = Array2::from_shape_fn((ny, nx), |(r, c)| {
        let (x, y) = (centered(c, nx, d), centered(r, ny, d));
        disks
            .iter()
            .filter(|k| (x - k.center[0]).powi(2) + (y - k.center[1]).powi(2) < k.radius * k.radius)
            .map(|k| k.value)
            .sum()
    });
    Slice::new(data, d).expect("finite by construction")
}

/// Disks with logistic edges of width `edge`.
pub fn soft_disks(grid: &Grid2D, disks: &[Disk], edge: f64) -> Array2<f64> {
    let (ny, nx) = grid.shape();
    let d = grid.delta();
    Array2::from_shape_fn((ny, nx), |(r, c)| {
        let (x, y) = (centered(c, nx, d), centered(r, ny, d));
        disks
            .iter()
            .map(|k| {
                let rr = ((x - k.center[0]).powi(2) + (y - k.center[1]).powi(2)).sqrt();
                k.value / (1.0 + ((rr - k.radius) / edge).exp())
            })
            .sum()
    })
}

/// Random soft-disk thickness map: disk centres within 30% of the extent
/// from the middle, radii 5-20% of the extent, values in `[0.1, 0.6)`.
pub fn random_soft_disks(grid: &Grid2D, count: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ext = grid.nx().max(grid.ny()) as f64 * grid.delta();
    let disks: Vec<Disk> = (0..count)
        .map(|_| Disk {
            center: [rng.gen_range(-0.3..0.3) * ext, rng.gen_range(-0.3..0.3) * ext],
            radius: rng.gen_range(0.05..0.2) * ext,
            value: rng.gen_range(0.1..0.6),
        })
        .collect();
    soft_disks(grid, &disks, 0.01 * ext)
}

pub fn gaussian_bump(grid: &Grid2D, amplitude: f64, width: f64) -> Array2<f64> {
    let (ny, nx) = grid.shape();
    let d = grid.delta();
    Array2::from_shape_fn((ny, nx), |(r, c)| {
        let (x, y) = (centered(c, nx, d), centered(r, ny, d));
        amplitude * (-(x * x + y * y) / (2.0 * width * width)).exp()
    })
}

/// Multiplies every sample by `1 + sigma N(0, 1)`.
pub fn multiplicative_noise(data: &mut [f64], sigma: f64, seed: u64) -> Result<()> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    data.iter_mut().for_each(|v| *v *= 1.0 + normal.sample(&mut rng));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_300() -> RectPhantom {
        rect_phantom(&Phantom1D::new(300.0, 1e4, Phantom1D::default_grid()).unwrap()).unwrap()
    }

    #[test]
    fn rect_centre_value() {
        let ph = rect_300();
        let c = 2048;
        assert_eq!(ph.t[c], 0.0);
        let want = (0.5 / (0.25f64 + 1e-4).sqrt()) / 300.0;
        assert!((ph.p[c] - want).abs() < 1e-15);
        assert!((want - 0.0033327).abs() < 1e-7);
    }

    #[test]
    fn rect_symmetric_and_bounded() {
        let ph = rect_300();
        for k in 1..2048 {
            assert_eq!(ph.p[2048 + k], ph.p[2048 - k]);
        }
        assert!(ph.p.iter().all(|&v| v >= 0.0 && v <= (1.0 / 300.0) * (1.0 + 1e-12)));
    }

    #[test]
    fn rect_tail_vanishes() {
        let g = Grid1D::spanning(4096, 8.0).unwrap();
        let ph = rect_phantom(&Phantom1D::new(300.0, 1e4, g).unwrap()).unwrap();
        let t = g.coords();
        for (x, p) in t.iter().zip(&ph.p) {
            if (x.abs() - 5.0).abs() < 1e-12 {
                assert!(p.abs() <= 1e-4 / 300.0);
            }
        }
    }

    #[test]
    fn rect_derivatives_match_differences() {
        let ph = rect_300();
        let h = Phantom1D::default_grid().delta();
        for j in (100..3996).step_by(37) {
            let d1 = (ph.p[j + 1] - ph.p[j - 1]) / (2.0 * h);
            assert!((d1 - ph.dp[j]).abs() <= 2e-3 * ph.dp.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }

    #[test]
    fn narrow_grid_rejected() {
        let g = Grid1D::spanning(64, 0.9).unwrap();
        assert_eq!(rect_phantom(&Phantom1D::new(300.0, 1e4, g).unwrap()), Err(Error::GridTooNarrow));
    }

    #[test]
    fn zero_distance_is_absorption() {
        let ph = rect_300();
        let i = propagate_1d(&ph.p, &ph.dp, &ph.d2p, 0.0).unwrap();
        for (a, p) in i.iter().zip(&ph.p) {
            assert_eq!(*a, (-p).exp());
        }
        assert!(propagate_1d(&ph.p, &ph.dp, &ph.d2p, -1.0).is_err());
    }

    #[test]
    fn constant_phase_is_unchanged() {
        let n = 64;
        let g = Grid1D::new(n, 0.1).unwrap();
        let p = vec![0.7; n];
        let z = vec![0.0; n];
        let a = propagate_1d(&p, &z, &z, 3.0).unwrap();
        let b = propagate_1d_spectral(&p, &g, 3.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - (-0.7f64).exp()).abs() < 1e-15);
            assert!((y - (-0.7f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn chain_rule_matches_spectral_in_interior() {
        let ph = rect_300();
        let g = Phantom1D::default_grid();
        let l = 0.0163522409163;
        let a = propagate_1d(&ph.p, &ph.dp, &ph.d2p, l).unwrap();
        let b = propagate_1d_spectral(&ph.p, &g, l).unwrap();
        let n = a.len();
        for j in n / 10..n - n / 10 {
            assert!(((a[j] - b[j]) / b[j]).abs() < 1e-6, "j={j}");
        }
        // edge fringes around t = +-1/2
        let mx = a.iter().cloned().fold(f64::MIN, f64::max);
        let mn = a.iter().cloned().fold(f64::MAX, f64::min);
        assert!(mx > 1.0 && mn < (-ph.p[n / 2]).exp());
    }

    #[test]
    fn mean_intensity_preserved() {
        let ph = rect_300();
        let g = Phantom1D::default_grid();
        let b = propagate_1d_spectral(&ph.p, &g, 0.02).unwrap();
        let m0: f64 = ph.p.iter().map(|v| (-v).exp()).sum::<f64>() / ph.p.len() as f64;
        let m1: f64 = b.iter().sum::<f64>() / b.len() as f64;
        assert!(((m0 - m1) / m0).abs() < 1e-10);
    }

    #[test]
    fn distance_ratio_exact() {
        let params = PhysicalParams::new(1.043e-6, 3.553e-10, 1.4e-10, 1.0).unwrap();
        let s = DistanceSeries::new(vec![3e4, 6e4], params).unwrap();
        let l = s.ls();
        assert_eq!(l[1] / l[0], 2.0);
        assert!(DistanceSeries::new(vec![1.0], params).is_err());
        assert!(DistanceSeries::new(vec![2.0, 1.0], params).is_err());
    }

    #[test]
    fn disk_area() {
        let g = Grid2D::square(256, 2.0 / 256.0).unwrap();
        let s = disk_phantom_2d(&g, &[Disk { center: [0.0, 0.0], radius: 0.6, value: 1.0 }]);
        let area: f64 = s.data().sum() * g.cell_area();
        assert!((area - PI * 0.36).abs() / (PI * 0.36) < 0.01);
        assert_eq!(disk_phantom_2d(&g, &[]).data().sum(), 0.0);
    }

    #[test]
    fn disjoint_disks_do_not_overlap() {
        let g = Grid2D::square(64, 1.0 / 32.0).unwrap();
        let a = Disk { center: [-0.4, 0.0], radius: 0.3, value: 1.0 };
        let b = Disk { center: [0.4, 0.0], radius: 0.3, value: 2.0 };
        let s = disk_phantom_2d(&g, &[a, b]);
        assert!(s.data().iter().all(|&v| v == 0.0 || v == 1.0 || v == 2.0));
    }

    #[test]
    fn noise_is_reproducible() {
        let mut a = vec![1.0; 32];
        let mut b = vec![1.0; 32];
        multiplicative_noise(&mut a, 0.01, 9).unwrap();
        multiplicative_noise(&mut b, 0.01, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().any(|&v| v != 1.0));
    }
}
