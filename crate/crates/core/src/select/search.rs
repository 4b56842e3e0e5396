use rayon::prelude::*;

use super::energy::{Band, XiBundle};
use crate::error::{Error, Result};
use crate::filters::Mode;

/// Curvature of `ln xi` as a plane curve over the bundle's own abscissa.
pub fn curvature(b: &XiBundle) -> Result<f64> {
    if !(b.xi > 0.0) {
        return Err(Error::Degenerate);
    }
    let g1 = b.dxi / b.xi;
    let g2 = (b.d2xi * b.xi - b.dxi * b.dxi) / (b.xi * b.xi);
    Ok(g2.abs() / (1.0 + g1 * g1).powf(1.5))
}

/// Abscissa against which the curvature of `ln xi` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureAxis {
    #[default]
    LogEll,
    Ell,
}

impl CurvatureAxis {
    pub fn kappa(self, b: &XiBundle) -> Result<f64> {
        match self {
            CurvatureAxis::LogEll => curvature(&b.in_log_ell()),
            CurvatureAxis::Ell => curvature(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Refine {
    #[default]
    Golden,
    /// Newton steps on `ln ell` with finite-difference derivatives of kappa;
    /// falls back to golden section when a step leaves the bracket.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FindEllOptions {
    /// Search interval; defaults to `[1e-2 delta^2, extent^2]`.
    pub bracket: Option<(f64, f64)>,
    pub grid_points: usize,
    pub axis: CurvatureAxis,
    pub refine: Refine,
    pub rel_tol: f64,
}

impl Default for FindEllOptions {
    fn default() -> Self {
        Self { bracket: None, grid_points: 48, axis: CurvatureAxis::LogEll, refine: Refine::Golden, rel_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRecord {
    pub ell: f64,
    pub xi: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    pub records: Vec<ProfileRecord>,
    pub argmax_ell: f64,
    pub argmax_kappa: f64,
    pub mode: Mode,
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

impl<'a> Band<'a> {
    pub fn default_bracket(&self) -> (f64, f64) {
        let src = self.source();
        (1e-2 * src.delta() * src.delta(), src.extent() * src.extent())
    }

    pub fn kappa(&self, ell: f64, axis: CurvatureAxis) -> Result<f64> {
        axis.kappa(&self.xi(ell))
    }

    pub fn find_ell(&self, opts: &FindEllOptions) -> Result<CurvatureProfile> {
        if !(self.total() > 0.0) {
            return Err(Error::Degenerate);
        }
        let (lo, hi) = opts.bracket.unwrap_or_else(|| self.default_bracket());
        maximize_curvature(|l| Ok(self.xi(l)), lo, hi, opts, self.source().mode())
    }
}

/// Coarse log-spaced sweep of `kappa` over `[lo, hi]`, then refinement around
/// the best interior sample.
pub fn maximize_curvature<F>(xi: F, lo: f64, hi: f64, opts: &FindEllOptions, mode: Mode) -> Result<CurvatureProfile>
where
    F: Fn(f64) -> Result<XiBundle> + Sync,
{
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || opts.grid_points < 16 {
        return Err(Error::Bracket { lo, hi, points: opts.grid_points });
    }
    let ells = log_space(lo, hi, opts.grid_points);
    let records = ells
        .par_iter()
        .map(|&ell| {
            let b = xi(ell)?;
            Ok(ProfileRecord { ell, xi: b.xi, kappa: opts.axis.kappa(&b)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in records.iter().enumerate() {
        if r.kappa > records[best].kappa {
            best = i;
        }
    }
    if best == 0 || best + 1 == records.len() {
        return Err(Error::NoInteriorMax { lo, hi });
    }
    let (ta, tb) = (records[best - 1].ell.ln(), records[best + 1].ell.ln());
    let k = |t: f64| xi(t.exp()).and_then(|b| opts.axis.kappa(&b)).unwrap_or(f64::NEG_INFINITY);
    let t_star = match opts.refine {
        Refine::Golden => golden_max(k, ta, tb, opts.rel_tol),
        Refine::Newton => newton_max(k, records[best].ell.ln(), ta, tb, opts.rel_tol)
            .unwrap_or_else(|| golden_max(k, ta, tb, opts.rel_tol)),
    };
    let refined = (t_star.exp(), k(t_star));
    let (argmax_ell, argmax_kappa) =
        if refined.1 >= records[best].kappa { refined } else { (records[best].ell, records[best].kappa) };
    Ok(CurvatureProfile { records, argmax_ell, argmax_kappa, mode })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[a, b]` until the interval is shorter than `tol`.
/// Ties keep the left point, i.e. the smaller abscissa.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd { c } else { d }
}

fn newton_max<F: Fn(f64) -> f64>(f: F, mut t: f64, a: f64, b: f64, tol: f64) -> Option<f64> {
    let h = 1e-3 * (b - a);
    for _ in 0..50 {
        let (fm, f0, fp) = (f(t - h), f(t), f(t + h));
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        if !(d2 < 0.0) {
            return None;
        }
        let step = -d1 / d2;
        t += step;
        if !(a..=b).contains(&t) {
            return None;
        }
        if step.abs() < tol {
            return Some(t);
        }
    }
    None
}
