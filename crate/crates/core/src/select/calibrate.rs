use std::f64::consts::PI;

use rayon::prelude::*;

use super::energy::ModeEnergy;
use super::search::FindEllOptions;
use crate::error::{Error, Result};
use crate::grid::CutoffMask;

/// Material and geometry: refractive decrement, absorption index,
/// wavelength, propagation distance (one length unit throughout).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    delta: f64,
    beta: f64,
    lambda: f64,
    d: f64,
}

impl PhysicalParams {
    pub fn new(delta: f64, beta: f64, lambda: f64, d: f64) -> Result<Self> {
        let nonneg = |what, v: f64| if v >= 0.0 && v.is_finite() { Ok(()) } else { Err(Error::NotPositive { what, value: v }) };
        let pos = |what, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(Error::NotPositive { what, value: v }) };
        nonneg("delta", delta)?;
        pos("beta", beta)?;
        pos("lambda", lambda)?;
        nonneg("d", d)?;
        Ok(Self { delta, beta, lambda, d })
    }

    pub fn at_distance(&self, d: f64) -> Result<Self> {
        Self::new(self.delta, self.beta, self.lambda, d)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn mu(&self) -> f64 {
        4.0 * PI * self.beta / self.lambda
    }

    pub fn l(&self) -> f64 {
        self.d * self.delta / self.mu()
    }
}

pub fn physical_l(p: &PhysicalParams) -> f64 {
    p.l()
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn affine_fit(x: &[f64], y: &[f64]) -> Result<AffineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Invalid(format!("affine fit needs two equal-length series of >= 2 points, got {} and {}", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("affine fit needs at least two distinct x".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(AffineFit { slope, intercept, r2 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub m: f64,
    pub ell_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MSweep {
    pub points: Vec<SweepPoint>,
    pub reference_l: f64,
    /// Calibrated multiplier and the `ell*` it yields.
    pub m_star: f64,
    pub ell_star: f64,
    /// Sweep samples on either side of the crossing.
    pub crossing: (usize, usize),
}

impl MSweep {
    pub fn strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].ell_star < w[0].ell_star)
    }

    pub fn rel_error(&self) -> f64 {
        (self.ell_star - self.reference_l).abs() / self.reference_l
    }
}

pub fn ell_star(energy: &ModeEnergy, m: f64, opts: &FindEllOptions) -> Result<f64> {
    Ok(energy.band(CutoffMask::new(m)?).find_ell(opts)?.argmax_ell)
}

/// Sweeps the cutoff multiplier, locates a sign change of `ell*(m) - L`
/// and bisects it (geometrically) down to `1e-9` relative width in `m`.
pub fn m_sweep(energy: &ModeEnergy, m_values: &[f64], reference_l: f64, opts: &FindEllOptions) -> Result<MSweep> {
    if m_values.len() < 2 || m_values.windows(2).any(|w| !(w[0] < w[1])) || !(m_values[0] > 0.0) {
        return Err(Error::Invalid("m values must be positive and strictly increasing".into()));
    }
    if !(reference_l > 0.0) {
        return Err(Error::NotPositive { what: "reference L", value: reference_l });
    }
    let points = m_values
        .par_iter()
        .map(|&m| Ok(SweepPoint { m, ell_star: ell_star(energy, m, opts)? }))
        .collect::<Result<Vec<_>>>()?;
    let side = |e: f64| e > reference_l;
    let i = (0..points.len() - 1)
        .find(|&i| side(points[i].ell_star) != side(points[i + 1].ell_star))
        .ok_or(Error::NoCrossing { lo: m_values[0], hi: m_values[m_values.len() - 1] })?;
    let (mut lo, mut hi) = (points[i], points[i + 1]);
    while hi.m / lo.m - 1.0 > 1e-9 {
        let m = (lo.m * hi.m).sqrt();
        let mid = SweepPoint { m, ell_star: ell_star(energy, m, opts)? };
        if side(mid.ell_star) == side(lo.ell_star) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if (lo.ell_star - reference_l).abs() <= (hi.ell_star - reference_l).abs() { lo } else { hi };
    Ok(MSweep { points, reference_l, m_star: best.m, ell_star: best.ell_star, crossing: (i, i + 1) })
}

/// `ell*` for each dataset at one fixed cutoff.
pub fn recover_series(energies: &[ModeEnergy], mask: CutoffMask, opts: &FindEllOptions) -> Result<Vec<f64>> {
    energies.par_iter().map(|e| Ok(e.band(mask).find_ell(opts)?.argmax_ell)).collect()
}

/// One calibration per dataset, each against its own reference `L_k`.
pub fn calibrate_series(energies: &[ModeEnergy], ls: &[f64], m_values: &[f64], opts: &FindEllOptions) -> Result<Vec<MSweep>> {
    if energies.len() != ls.len() {
        return Err(Error::Invalid("one reference L per dataset".into()));
    }
    energies.par_iter().zip(ls).map(|(e, &l)| m_sweep(e, m_values, l, opts)).collect()
}
