//! Phase-retrieval filters: 2D Lorentzian on frames, 1D Lorentzian along
//! sinogram rows, and the difference field between the two routes.

use std::f64::consts::PI;
use std::fmt;

use ndarray::{Array, Array1, Array2, Dimension, Ix1, Ix2};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{admits, CutoffMask, Grid1D, Grid2D};
use crate::kernels::{k_hat, t_hat, Ell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Frame,
    Slice,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Frame => "FRAME",
            Mode::Slice => "SLICE",
        })
    }
}

fn check_positive<'a>(values: impl Iterator<Item = &'a f64>) -> Result<usize> {
    let mut above_one = 0;
    for (i, &v) in values.enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
        if v <= 0.0 {
            return Err(Error::NonPositive { index: i, value: v });
        }
        if v > 1.0 {
            above_one += 1;
        }
    }
    Ok(above_one)
}

fn check_finite<'a>(values: impl Iterator<Item = &'a f64>) -> Result<()> {
    match values.enumerate().find(|(_, v)| !v.is_finite()) {
        Some((i, _)) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Normalized intensity `I / I0` on a square-pixel grid.
#[derive(Debug, Clone)]
pub struct Frame {
    data: Array2<f64>,
    grid: Grid2D,
}

impl Frame {
    pub fn new(data: Array2<f64>, delta: f64) -> Result<Self> {
        let (ny, nx) = data.dim();
        let grid = Grid2D::new(nx, ny, delta)?;
        let above = check_positive(data.iter())?;
        if above > 0 {
            log::warn!("frame has {above} samples above 1; processing anyway");
        }
        Ok(Self { data: data.as_standard_layout().into_owned(), grid })
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn neg_log(&self) -> Array2<f64> {
        self.data.mapv(|v| -v.ln())
    }
}

/// One-dimensional intensity profile.
#[derive(Debug, Clone)]
pub struct Profile {
    data: Vec<f64>,
    grid: Grid1D,
}

impl Profile {
    pub fn new(data: Vec<f64>, delta: f64) -> Result<Self> {
        let grid = Grid1D::new(data.len(), delta)?;
        let above = check_positive(data.iter())?;
        if above > 0 {
            log::warn!("profile has {above} samples above 1; processing anyway");
        }
        Ok(Self { data, grid })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn neg_log(&self) -> Vec<f64> {
        self.data.iter().map(|v| -v.ln()).collect()
    }
}

/// Line integrals `g(theta, t)`: one row per angle.
#[derive(Debug, Clone)]
pub struct Sinogram {
    data: Array2<f64>,
    t_grid: Grid1D,
    angles: Vec<f64>,
}

impl Sinogram {
    pub fn new(data: Array2<f64>, delta_t: f64, angles: Vec<f64>) -> Result<Self> {
        let (na, nt) = data.dim();
        let t_grid = Grid1D::new(nt, delta_t)?;
        let ok = angles.len() >= 2
            && angles.iter().all(|a| (0.0..PI).contains(a))
            && angles.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::Angles);
        }
        if angles.len() != na {
            return Err(Error::Shape { expected: vec![angles.len(), nt], got: vec![na, nt] });
        }
        check_finite(data.iter())?;
        Ok(Self { data: data.as_standard_layout().into_owned(), t_grid, angles })
    }

    /// `n` equally spaced angles `k pi / n`.
    pub fn uniform_angles(n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 * PI / n as f64).collect()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn t_grid(&self) -> &Grid1D {
        &self.t_grid
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn with_data(&self, data: Array2<f64>) -> Result<Self> {
        Self::new(data, self.t_grid.delta(), self.angles.clone())
    }

    /// Angular quadrature weights: half the gap to each neighbour, with the
    /// gap across `pi` wrapping around.
    pub fn angle_weights(&self) -> Vec<f64> {
        let a = &self.angles;
        let n = a.len();
        (0..n)
            .map(|k| {
                let prev = if k == 0 { a[n - 1] - PI } else { a[k - 1] };
                let next = if k + 1 == n { a[0] + PI } else { a[k + 1] };
                0.5 * (next - prev)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub mode: Mode,
    pub ell: f64,
    pub m: f64,
    pub c: f64,
}

#[derive(Debug, Clone)]
pub struct RetrievedMap<D: Dimension> {
    pub data: Array<f64, D>,
    pub provenance: Provenance,
}

fn lorentz_frame_weight(ell: Ell, mask: CutoffMask, delta: f64) -> impl Fn([f64; 2]) -> f64 + Sync {
    let qc = mask.q_c(delta);
    move |q: [f64; 2]| if admits(q[0].abs().max(q[1].abs()), qc) { k_hat(q, ell) } else { 0.0 }
}

fn lorentz_row_weight(ell: Ell, mask: CutoffMask, delta: f64) -> impl Fn(f64) -> f64 + Sync {
    let qc = mask.q_c(delta);
    move |s: f64| if admits(s.abs(), qc) { t_hat(s, ell) } else { 0.0 }
}

fn is_identity(ell: Ell, mask: CutoffMask) -> bool {
    ell.get() == 0.0 && mask.is_full()
}

/// `K_ell * f` with the mask applied, before the log. Exact copy when the
/// multiplier is one everywhere.
pub fn smooth_frame(f: &Frame, ell: Ell, mask: CutoffMask) -> Array2<f64> {
    if is_identity(ell, mask) {
        return f.data.clone();
    }
    fft::multiply2(f.data.view(), &f.grid, lorentz_frame_weight(ell, mask, f.grid.delta()))
}

pub fn smooth_profile(f: &Profile, ell: Ell, mask: CutoffMask) -> Vec<f64> {
    if is_identity(ell, mask) {
        return f.data.clone();
    }
    fft::multiply1(&f.data, &f.grid, lorentz_row_weight(ell, mask, f.grid.delta()))
}

/// Row-wise `T_ell` along axis 1 of an arbitrary array.
pub fn smooth_rows(x: &Array2<f64>, t: &Grid1D, ell: Ell, mask: CutoffMask) -> Array2<f64> {
    if is_identity(ell, mask) {
        return x.clone();
    }
    fft::multiply_rows(x.view(), t, lorentz_row_weight(ell, mask, t.delta()))
}

fn neg_log_checked<D: Dimension>(u: Array<f64, D>, c: f64) -> Result<Array<f64, D>> {
    if let Some((i, &v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::FilteredNonPositive { index: i, value: v });
    }
    Ok(u.mapv(|v| -c * v.ln()))
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::NotPositive { what: "c", value: c })
    }
}

pub fn filter_frame(f: &Frame, ell: Ell, mask: CutoffMask, c: f64) -> Result<RetrievedMap<Ix2>> {
    check_c(c)?;
    let data = neg_log_checked(smooth_frame(f, ell, mask), c)?;
    Ok(RetrievedMap { data, provenance: Provenance { mode: Mode::Frame, ell: ell.get(), m: mask.m(), c } })
}

pub fn filter_profile(f: &Profile, ell: Ell, mask: CutoffMask, c: f64) -> Result<RetrievedMap<Ix1>> {
    check_c(c)?;
    let data = neg_log_checked(Array1::from(smooth_profile(f, ell, mask)), c)?;
    Ok(RetrievedMap { data, provenance: Provenance { mode: Mode::Frame, ell: ell.get(), m: mask.m(), c } })
}

pub fn filter_sinogram(g: &Sinogram, ell: Ell, mask: CutoffMask) -> RetrievedMap<Ix2> {
    RetrievedMap {
        data: smooth_rows(&g.data, &g.t_grid, ell, mask),
        provenance: Provenance { mode: Mode::Slice, ell: ell.get(), m: mask.m(), c: 1.0 },
    }
}

#[derive(Debug, Clone)]
pub struct DeltaReport {
    pub field: Array2<f64>,
    pub max_abs: f64,
    pub bound: f64,
}

impl DeltaReport {
    pub fn holds(&self) -> bool {
        self.max_abs <= self.bound
    }
}

/// `T_ell * (-ln f)` along rows plus `ln(K_ell * f)`, and the bound
/// `2 ||ln f|| / (1 + 4 pi^2 ell)` with the L2 norm over the frame area.
pub fn delta_field(f: &Frame, ell: Ell, mask: CutoffMask) -> Result<DeltaReport> {
    let g = f.neg_log();
    let slice_route = smooth_rows(&g, &f.grid.x_axis(), ell, mask);
    let smoothed = smooth_frame(f, ell, mask);
    if let Some((i, &v)) = smoothed.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::FilteredNonPositive { index: i, value: v });
    }
    let field = slice_route + smoothed.mapv(f64::ln);
    let max_abs = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let norm = (g.iter().map(|v| v * v).sum::<f64>() * f.grid.cell_area()).sqrt();
    let bound = 2.0 * norm / (1.0 + 4.0 * PI * PI * ell.get());
    Ok(DeltaReport { field, max_abs, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rejects_nonpositive() {
        let mut d = Array2::from_elem((4, 4), 0.5);
        d[[1, 2]] = 0.0;
        assert_eq!(Frame::new(d, 1.0).unwrap_err(), Error::NonPositive { index: 6, value: 0.0 });
        let mut d = Array2::from_elem((4, 4), 0.5);
        d[[0, 1]] = f64::NAN;
        assert_eq!(Frame::new(d, 1.0).unwrap_err(), Error::NonFinite(1));
    }

    #[test]
    fn frame_above_one_is_accepted() {
        let d = Array2::from_elem((4, 4), 1.2);
        assert!(Frame::new(d, 1.0).is_ok());
    }

    #[test]
    fn sinogram_angle_checks() {
        let d = Array2::zeros((2, 8));
        assert!(Sinogram::new(d.clone(), 1.0, vec![0.0, 1.0]).is_ok());
        assert_eq!(Sinogram::new(d.clone(), 1.0, vec![1.0, 0.5]).unwrap_err(), Error::Angles);
        assert_eq!(Sinogram::new(d.clone(), 1.0, vec![0.0, PI]).unwrap_err(), Error::Angles);
        let one = Array2::zeros((1, 8));
        assert_eq!(Sinogram::new(one, 1.0, vec![0.0]).unwrap_err(), Error::Angles);
        assert!(matches!(Sinogram::new(d, 1.0, vec![0.0, 0.1, 0.2]), Err(Error::Shape { .. })));
    }

    #[test]
    fn uniform_angle_weights() {
        let g = Sinogram::new(Array2::zeros((6, 4)), 1.0, Sinogram::uniform_angles(6)).unwrap();
        for w in g.angle_weights() {
            assert!((w - PI / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn filter_errors_before_log() {
        // a single bright spike on a dark frame: a hard cutoff rings below zero
        let mut d = Array2::from_elem((16, 16), 1e-6);
        d[[8, 8]] = 1.0;
        let f = Frame::new(d, 1.0).unwrap();
        let err = filter_frame(&f, Ell::ZERO, CutoffMask::new(0.3).unwrap(), 1.0).unwrap_err();
        assert!(matches!(err, Error::FilteredNonPositive { .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn c_scales_output() {
        let d = Array2::from_shape_fn((8, 8), |(r, c)| 0.5 + 0.01 * (r + c) as f64);
        let f = Frame::new(d, 0.1).unwrap();
        let l = Ell::new(1e-3).unwrap();
        let p1 = filter_frame(&f, l, CutoffMask::full(), 1.0).unwrap();
        let p3 = filter_frame(&f, l, CutoffMask::full(), 3.0).unwrap();
        for (a, b) in p1.data.iter().zip(p3.data.iter()) {
            assert!((3.0 * a - b).abs() < 1e-14);
        }
        assert!(filter_frame(&f, l, CutoffMask::full(), 0.0).is_err());
    }
}
