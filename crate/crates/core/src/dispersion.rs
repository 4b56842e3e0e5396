//! Dispersion function `D(ell, sigma_c) = int_0^sigma_c s^4 / (1 + 4 pi^2 ell s^2)^2 ds`,
//! the band-limited `xi_s` of a flat spectrum up to constants.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::filters::Mode;
use crate::quad::integrate;
use crate::select::{maximize_curvature, CurvatureProfile, FindEllOptions, XiBundle};

const FOUR_PI2: f64 = 4.0 * PI * PI;

fn check(ell: f64, sigma_c: f64) -> Result<()> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::NotPositive { what: "ell", value: ell });
    }
    if !(sigma_c > 0.0 && sigma_c.is_finite()) {
        return Err(Error::NotPositive { what: "sigma_c", value: sigma_c });
    }
    Ok(())
}

fn quad(f: impl Fn(f64) -> f64, sigma_c: f64) -> Result<f64> {
    Ok(integrate(f, 0.0, sigma_c, 1e-10, 1e-13)?.value)
}

pub fn dispersion_d(ell: f64, sigma_c: f64) -> Result<f64> {
    check(ell, sigma_c)?;
    let b = FOUR_PI2 * ell;
    quad(|s| s.powi(4) / (1.0 + b * s * s).powi(2), sigma_c)
}

/// `D` and its first two `ell`-derivatives, each by quadrature.
pub fn dispersion_bundle(ell: f64, sigma_c: f64) -> Result<XiBundle> {
    check(ell, sigma_c)?;
    let b = FOUR_PI2 * ell;
    let d0 = quad(|s| s.powi(4) / (1.0 + b * s * s).powi(2), sigma_c)?;
    let d1 = quad(|s| -2.0 * FOUR_PI2 * s.powi(6) / (1.0 + b * s * s).powi(3), sigma_c)?;
    let d2 = quad(|s| 6.0 * FOUR_PI2 * FOUR_PI2 * s.powi(8) / (1.0 + b * s * s).powi(4), sigma_c)?;
    Ok(XiBundle { ell, xi: d0, dxi: d1, d2xi: d2 })
}

/// Antiderivative evaluated exactly.
pub fn dispersion_closed_form(ell: f64, sigma_c: f64) -> Result<f64> {
    check(ell, sigma_c)?;
    let (l, c) = (ell, sigma_c);
    let b = FOUR_PI2 * l;
    let rational = (3.0 * c + 8.0 * PI * PI * l * c.powi(3)) / (32.0 * PI.powi(4) * l * l * (b * c * c + 1.0));
    let arc = 3.0 * (2.0 * PI * l.sqrt() * c).atan() / (2.0 * b.powf(2.5));
    Ok(rational - arc)
}

/// The bracketed expression as usually printed, with `sigma_c^2` in the
/// numerator and `atan(2 pi sqrt(sigma_c))`; kept to report how far it
/// is from the integral.
pub fn dispersion_printed_form(ell: f64, sigma_c: f64) -> Result<f64> {
    check(ell, sigma_c)?;
    let (l, c) = (ell, sigma_c);
    let b = FOUR_PI2 * l;
    let rational = (3.0 * c + 8.0 * PI * PI * l * c * c) / (32.0 * PI.powi(4) * l * l * (b * c * c + 1.0));
    let arc = 3.0 * (2.0 * PI * c.sqrt()).atan() / (2.0 * b.powf(2.5));
    Ok(rational - arc)
}

/// Maximum-curvature `ell` of `D(., sigma_c)` over `[lo, hi]`.
pub fn dispersion_profile(sigma_c: f64, lo: f64, hi: f64, opts: &FindEllOptions) -> Result<CurvatureProfile> {
    maximize_curvature(|l| dispersion_bundle(l, sigma_c), lo, hi, opts, Mode::Slice)
}
