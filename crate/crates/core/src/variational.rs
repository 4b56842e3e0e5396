//! The regularized functionals behind the filters and numerical checks of
//! their derivatives and stationary points.
//!
//! Frames: `H(p) = E(p) + ell R(p)` with `u = e^{-p}`,
//! `E(p) = ||u - f||^2` and `R(p) = int |grad u|^2`, so that
//! `E'(p)h = 2 int u (f - u) h` and `R'(p)h = 2 int u lap(u) h`.
//! `H'` vanishes where `u - ell lap(u) = f`, i.e. at `-ln(K_ell * f)`.
//!
//! Sinograms: `V(p) = ||p - g||^2 + ell ||d_t p||^2`, minimized by `T_ell * g`.

use std::f64::consts::PI;

use ndarray::{Array2, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft;
use crate::filters::{Frame, Sinogram};
use crate::grid::{Grid1D, Grid2D};
use crate::kernels::Ell;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalReport {
    pub value: f64,
    pub directional_derivative: f64,
    pub fd_derivative: f64,
    pub rel_error: f64,
}

impl FunctionalReport {
    fn new(value: f64, analytic: f64, fd: f64) -> Self {
        Self {
            value,
            directional_derivative: analytic,
            fd_derivative: fd,
            rel_error: (analytic - fd).abs() / fd.abs().max(1e-30),
        }
    }
}

fn check(grid: &Grid2D, x: &Array2<f64>) -> Result<()> {
    grid.check_shape(x.shape())?;
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

fn inner(a: &Array2<f64>, b: &Array2<f64>, cell: f64) -> f64 {
    Zip::from(a).and(b).fold(0.0, |acc, x, y| acc + x * y) * cell
}

/// `L2` norm with the pixel area as measure.
pub fn norm(x: &Array2<f64>, grid: &Grid2D) -> f64 {
    inner(x, x, grid.cell_area()).sqrt()
}

fn sup(x: &Array2<f64>) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn fd_step(p: &Array2<f64>) -> f64 {
    1e-5 * (1.0 + sup(p))
}

/// `int |grad u|^2` by Parseval.
pub fn dirichlet_spectral(u: &Array2<f64>, grid: &Grid2D) -> f64 {
    let spec = fft::fft2(u.view());
    let s: f64 = spec.indexed_iter().map(|((r, c), z)| fft::lap_symbol(grid.q(r, c)) * z.norm_sqr()).sum();
    s * grid.cell_area()
}

/// `int |grad u|^2` with periodic central differences.
pub fn dirichlet_fd(u: &Array2<f64>, grid: &Grid2D) -> f64 {
    let (ny, nx) = u.dim();
    let d = grid.delta();
    let mut s = 0.0;
    for r in 0..ny {
        for c in 0..nx {
            let gx = (u[[r, (c + 1) % nx]] - u[[r, (c + nx - 1) % nx]]) / (2.0 * d);
            let gy = (u[[(r + 1) % ny, c]] - u[[(r + ny - 1) % ny, c]]) / (2.0 * d);
            s += gx * gx + gy * gy;
        }
    }
    s * grid.cell_area()
}

fn e_term(p: &Array2<f64>, f: &Array2<f64>, cell: f64) -> f64 {
    Zip::from(p).and(f).fold(0.0, |acc, &p, &f| acc + ((-p).exp() - f).powi(2)) * cell
}

fn h_value(p: &Array2<f64>, f: &Array2<f64>, grid: &Grid2D, ell: f64) -> f64 {
    let u = p.mapv(|v| (-v).exp());
    e_term(p, f, grid.cell_area()) + ell * dirichlet_spectral(&u, grid)
}

pub fn eval_h(p: &Array2<f64>, f: &Frame, ell: Ell) -> Result<f64> {
    check(f.grid(), p)?;
    Ok(h_value(p, f.data(), f.grid(), ell.get()))
}

fn e_prime(p: &Array2<f64>, f: &Array2<f64>, h: &Array2<f64>, cell: f64) -> f64 {
    Zip::from(p).and(f).and(h).fold(0.0, |acc, &p, &f, &h| {
        let u = (-p).exp();
        acc + 2.0 * u * (f - u) * h
    }) * cell
}

fn r_prime(u: &Array2<f64>, lap_u: &Array2<f64>, h: &Array2<f64>, cell: f64) -> f64 {
    Zip::from(u).and(lap_u).and(h).fold(0.0, |acc, &u, &l, &h| acc + 2.0 * u * l * h) * cell
}

/// Analytic `E'(p)h` against a central difference, with `f = e^{-g}`.
pub fn frechet_check_e(p: &Array2<f64>, g: &Array2<f64>, grid: &Grid2D, directions: &[Array2<f64>]) -> Result<Vec<FunctionalReport>> {
    check(grid, p)?;
    check(grid, g)?;
    let f = g.mapv(|v| (-v).exp());
    let cell = grid.cell_area();
    let value = e_term(p, &f, cell);
    let eps = fd_step(p);
    directions
        .iter()
        .map(|h| {
            check(grid, h)?;
            let fd = (e_term(&(p + &(h * eps)), &f, cell) - e_term(&(p - &(h * eps)), &f, cell)) / (2.0 * eps);
            Ok(FunctionalReport::new(value, e_prime(p, &f, h, cell), fd))
        })
        .collect()
}

/// Analytic `R'(p)h` against a central difference.
pub fn frechet_check_r(p: &Array2<f64>, grid: &Grid2D, directions: &[Array2<f64>]) -> Result<Vec<FunctionalReport>> {
    check(grid, p)?;
    let r = |p: &Array2<f64>| dirichlet_spectral(&p.mapv(|v| (-v).exp()), grid);
    let u = p.mapv(|v| (-v).exp());
    let lap_u = fft::laplacian2(u.view(), grid);
    let value = r(p);
    let eps = fd_step(p);
    directions
        .iter()
        .map(|h| {
            check(grid, h)?;
            let fd = (r(&(p + &(h * eps))) - r(&(p - &(h * eps)))) / (2.0 * eps);
            Ok(FunctionalReport::new(value, r_prime(&u, &lap_u, h, grid.cell_area()), fd))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityRecord {
    /// `H'(p)h`.
    pub derivative: f64,
    /// `|E'(p)h| + ell |R'(p)h|`, the size the two terms cancel from.
    pub scale: f64,
}

impl StationarityRecord {
    pub fn ratio(&self) -> f64 {
        self.derivative.abs() / self.scale.max(1e-300)
    }
}

pub fn stationarity(p_bar: &Array2<f64>, f: &Frame, ell: Ell, directions: &[Array2<f64>]) -> Result<Vec<StationarityRecord>> {
    let grid = f.grid();
    check(grid, p_bar)?;
    let cell = grid.cell_area();
    let u = p_bar.mapv(|v| (-v).exp());
    let lap_u = fft::laplacian2(u.view(), grid);
    directions
        .iter()
        .map(|h| {
            check(grid, h)?;
            let de = e_prime(p_bar, f.data(), h, cell);
            let dr = ell.get() * r_prime(&u, &lap_u, h, cell);
            Ok(StationarityRecord { derivative: de + dr, scale: de.abs() + dr.abs() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderRecord {
    /// `[H(p + eps v) - 2 H(p) + H(p - eps v)] / eps^2`.
    pub quotient: f64,
    pub norm2: f64,
    /// `min(H(p + eps v), H(p - eps v)) - H(p)`.
    pub gain: f64,
}

pub fn second_order_check(
    p_bar: &Array2<f64>,
    f: &Frame,
    ell: Ell,
    directions: &[Array2<f64>],
    eps: f64,
) -> Result<Vec<SecondOrderRecord>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::NotPositive { what: "eps", value: eps });
    }
    let grid = f.grid();
    check(grid, p_bar)?;
    let h0 = h_value(p_bar, f.data(), grid, ell.get());
    directions
        .iter()
        .map(|v| {
            check(grid, v)?;
            let hp = h_value(&(p_bar + &(v * eps)), f.data(), grid, ell.get());
            let hm = h_value(&(p_bar - &(v * eps)), f.data(), grid, ell.get());
            Ok(SecondOrderRecord {
                quotient: (hp - 2.0 * h0 + hm) / (eps * eps),
                norm2: norm(v, grid).powi(2),
                gain: hp.min(hm) - h0,
            })
        })
        .collect()
}

/// `||d_t p||^2` by Parseval, measured as a sum over rows of `sum_t (.) delta_t`.
pub fn row_derivative_energy(p: &Array2<f64>, t: &Grid1D) -> f64 {
    let spec = fft::fft_rows(p.view());
    let s: f64 = spec
        .indexed_iter()
        .map(|((_, k), z)| 4.0 * PI * PI * t.freq(k).powi(2) * z.norm_sqr())
        .sum();
    s * t.delta()
}

/// `||v||^2 + ell ||d_t v||^2`, the exact second variation of `V` along `v`.
pub fn v_quadratic(v: &Array2<f64>, t: &Grid1D, ell: f64) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() * t.delta() + ell * row_derivative_energy(v, t)
}

pub fn eval_v(p: &Array2<f64>, g: &Sinogram, ell: Ell) -> Result<f64> {
    let (na, nt) = g.data().dim();
    if p.dim() != (na, nt) {
        return Err(Error::Shape { expected: vec![na, nt], got: p.shape().to_vec() });
    }
    if let Some(i) = p.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let t = g.t_grid();
    let misfit: f64 = Zip::from(p).and(g.data()).fold(0.0, |acc, a, b| acc + (a - b).powi(2)) * t.delta();
    Ok(misfit + ell.get() * row_derivative_energy(p, t))
}

/// `count` directions of unit `L2` norm, each a Gaussian field smoothed over
/// `corr` pixels (white noise when `corr` is 0).
pub fn random_directions(grid: &Grid2D, count: usize, corr: f64, seed: u64) -> Vec<Array2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.delta();
    (0..count)
        .map(|_| {
            let raw = Array2::from_shape_fn(grid.shape(), |_| StandardNormal.sample(&mut rng));
            let v: Array2<f64> = if corr > 0.0 {
                let w = corr * d;
                fft::multiply2(raw.view(), grid, |q| (-2.0 * PI * PI * w * w * (q[0] * q[0] + q[1] * q[1])).exp())
            } else {
                raw
            };
            let n = norm(&v, grid);
            v / n
        })
        .collect()
}
