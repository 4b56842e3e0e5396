use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fft;
use crate::filters::{smooth_frame, smooth_rows, Frame, Mode, Profile, Sinogram};
use crate::grid::{admits, CutoffMask, Grid1D};
use crate::kernels::{lorentz, DerivOrder, Ell};

/// `xi(ell)` and its first two `ell`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiBundle {
    pub ell: f64,
    pub xi: f64,
    pub dxi: f64,
    pub d2xi: f64,
}

impl XiBundle {
    /// The same curve reparametrized by `t = ln ell`.
    pub fn in_log_ell(&self) -> XiBundle {
        let l = self.ell;
        XiBundle {
            ell: l.ln(),
            xi: self.xi,
            dxi: l * self.dxi,
            d2xi: l * self.dxi + l * l * self.d2xi,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum SelectInput<'a> {
    Frame(&'a Frame),
    Profile(&'a Profile),
    Sinogram(&'a Sinogram),
}

/// Spectral energy of the data, one entry per DFT mode, sorted by the
/// mode's infinity-norm frequency so any cutoff is a prefix.
///
/// With `w_k = cell * a_k^2 |X_k|^2` the curvature functional is
/// `xi(ell) = sum_k w_k K(a_k, ell)^2`, which is `||lap(K * x)||^2` by Parseval.
#[derive(Debug, Clone)]
pub struct ModeEnergy {
    key: Vec<f64>,
    a: Vec<f64>,
    w: Vec<f64>,
    delta: f64,
    extent: f64,
    mode: Mode,
}

const FOUR_PI2: f64 = 4.0 * PI * PI;

impl ModeEnergy {
    pub fn new(input: SelectInput<'_>, mode: Mode) -> Result<Self> {
        let mut modes: Vec<(f64, f64, f64)> = Vec::new();
        let (delta, extent) = match (input, mode) {
            (SelectInput::Frame(f), Mode::Frame) => {
                let g = f.grid();
                let spec = fft::fft2(f.data().view());
                let cell = g.cell_area();
                for ((r, c), z) in spec.indexed_iter() {
                    let q = g.q(r, c);
                    let a = FOUR_PI2 * (q[0] * q[0] + q[1] * q[1]);
                    if a > 0.0 {
                        modes.push((q[0].abs().max(q[1].abs()), a, cell * a * a * z.norm_sqr()));
                    }
                }
                (g.delta(), g.nx().max(g.ny()) as f64 * g.delta())
            }
            (SelectInput::Profile(f), Mode::Frame) => {
                push_rows(&mut modes, &[fft::fft1(f.data())], f.grid());
                (f.grid().delta(), f.grid().len())
            }
            (SelectInput::Frame(f), Mode::Slice) => {
                let spec = fft::fft_rows(f.neg_log().view());
                let t = f.grid().x_axis();
                push_rows(&mut modes, &rows_of(&spec), &t);
                (t.delta(), t.len())
            }
            (SelectInput::Profile(f), Mode::Slice) => {
                push_rows(&mut modes, &[fft::fft1(&f.neg_log())], f.grid());
                (f.grid().delta(), f.grid().len())
            }
            (SelectInput::Sinogram(g), Mode::Slice) => {
                let spec = fft::fft_rows(g.data().view());
                push_rows(&mut modes, &rows_of(&spec), g.t_grid());
                (g.t_grid().delta(), g.t_grid().len())
            }
            (SelectInput::Sinogram(_), Mode::Frame) => {
                return Err(Error::Invalid("sinogram input needs slice mode".into()));
            }
        };
        modes.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let (key, a, w) = modes.into_iter().fold((vec![], vec![], vec![]), |mut acc, (k, a, w)| {
            acc.0.push(k);
            acc.1.push(a);
            acc.2.push(w);
            acc
        });
        Ok(Self { key, a, w, delta, extent, mode })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Largest side of the data window (length units).
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn band(&self, mask: CutoffMask) -> Band<'_> {
        let qc = mask.q_c(self.delta);
        let n = self.key.partition_point(|&k| admits(k, qc));
        Band { a: &self.a[..n], w: &self.w[..n], energy: self }
    }
}

fn rows_of(spec: &Array2<num_complex::Complex64>) -> Vec<Vec<num_complex::Complex64>> {
    spec.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Rows share one frequency axis, so their energies add per column.
fn push_rows(modes: &mut Vec<(f64, f64, f64)>, rows: &[Vec<num_complex::Complex64>], t: &Grid1D) {
    for j in 0..t.n() {
        let s = t.freq(j);
        let a = FOUR_PI2 * s * s;
        if a == 0.0 {
            continue;
        }
        let p: f64 = rows.iter().map(|r| r[j].norm_sqr()).sum();
        modes.push((s.abs(), a, t.delta() * a * a * p));
    }
}

/// The modes admitted by one cutoff.
#[derive(Debug, Clone, Copy)]
pub struct Band<'a> {
    a: &'a [f64],
    w: &'a [f64],
    energy: &'a ModeEnergy,
}

impl<'a> Band<'a> {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn source(&self) -> &'a ModeEnergy {
        self.energy
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn xi(&self, ell: f64) -> XiBundle {
        let (mut x, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for (&a, &w) in self.a.iter().zip(self.w) {
            let k0 = lorentz(a, ell, DerivOrder::Zero);
            let k1 = lorentz(a, ell, DerivOrder::One);
            let k2 = lorentz(a, ell, DerivOrder::Two);
            x += w * k0 * k0;
            d1 += w * 2.0 * k0 * k1;
            d2 += w * 2.0 * (k1 * k1 + k0 * k2);
        }
        XiBundle { ell, xi: x, dxi: d1, d2xi: d2 }
    }
}

fn positive_ell(ell: Ell) -> Result<f64> {
    match ell.get() {
        v if v > 0.0 => Ok(v),
        v => Err(Error::NotPositive { what: "ell", value: v }),
    }
}

/// `||lap(K_ell * f)||^2` and derivatives, from the Parseval sum.
pub fn xi_frame(f: &Frame, ell: Ell, mask: CutoffMask) -> Result<XiBundle> {
    let l = positive_ell(ell)?;
    Ok(ModeEnergy::new(SelectInput::Frame(f), Mode::Frame)?.band(mask).xi(l))
}

/// `||d_t^2 (T_ell * g)||^2` and derivatives, summed over rows.
pub fn xi_slice(g: &Sinogram, ell: Ell, mask: CutoffMask) -> Result<XiBundle> {
    let l = positive_ell(ell)?;
    Ok(ModeEnergy::new(SelectInput::Sinogram(g), Mode::Slice)?.band(mask).xi(l))
}

/// `||K_ell * f - f_masked||^2 / ell^2` evaluated in real space.
pub fn xi_frame_residual(f: &Frame, ell: Ell, mask: CutoffMask) -> Result<f64> {
    let l = positive_ell(ell)?;
    let u = smooth_frame(f, ell, mask);
    let fm = smooth_frame(f, Ell::ZERO, mask);
    let r: f64 = u.iter().zip(fm.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(r * f.grid().cell_area() / (l * l))
}

pub fn xi_slice_residual(g: &Sinogram, ell: Ell, mask: CutoffMask) -> Result<f64> {
    let l = positive_ell(ell)?;
    let p = smooth_rows(g.data(), g.t_grid(), ell, mask);
    let gm = smooth_rows(g.data(), g.t_grid(), Ell::ZERO, mask);
    let r: f64 = p.iter().zip(gm.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(r * g.t_grid().delta() / (l * l))
}
