//! Frequency-domain multipliers. All take cyclic frequencies (1/length) and
//! `ell` in length^2.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

const FOUR_PI2: f64 = 4.0 * PI * PI;

/// Regularization parameter `ell >= 0` (length^2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Ell(f64);

impl Ell {
    pub const ZERO: Ell = Ell(0.0);

    pub fn new(v: f64) -> Result<Self> {
        if v.is_finite() && v >= 0.0 {
            Ok(Ell(v))
        } else {
            Err(Error::NegativeEll(v))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Ell {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Ell::new(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    Zero,
    One,
    Two,
}

impl TryFrom<u8> for DerivOrder {
    type Error = Error;
    fn try_from(n: u8) -> Result<Self> {
        match n {
            0 => Ok(DerivOrder::Zero),
            1 => Ok(DerivOrder::One),
            2 => Ok(DerivOrder::Two),
            _ => Err(Error::DerivOrder(n)),
        }
    }
}

/// `1 / (1 + a ell)` and its `ell`-derivatives, `n! (-a)^n / (1 + a ell)^(n+1)`.
#[inline]
pub fn lorentz(a: f64, ell: f64, n: DerivOrder) -> f64 {
    let d = 1.0 / (1.0 + a * ell);
    match n {
        DerivOrder::Zero => d,
        DerivOrder::One => -a * d * d,
        DerivOrder::Two => 2.0 * a * a * d * d * d,
    }
}

pub fn k_hat(q: [f64; 2], ell: Ell) -> f64 {
    lorentz(FOUR_PI2 * (q[0] * q[0] + q[1] * q[1]), ell.0, DerivOrder::Zero)
}

pub fn t_hat(sigma: f64, ell: Ell) -> f64 {
    lorentz(FOUR_PI2 * (sigma * sigma), ell.0, DerivOrder::Zero)
}

pub fn k_eps_hat(q: [f64; 2], ell: Ell, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Epsilon(epsilon));
    }
    Ok(lorentz(FOUR_PI2 * (q[0] * q[0] + epsilon * q[1] * q[1]), ell.0, DerivOrder::Zero))
}

/// Derivative kernel as a function of `a = 4 pi^2 |q|^2` (or `4 pi^2 sigma^2`).
pub fn deriv_kernel_hat(a: f64, ell: Ell, n: u8) -> Result<f64> {
    Ok(lorentz(a, ell.0, DerivOrder::try_from(n)?))
}

pub fn generalized_y_hat(sigma: f64, ell: Ell, a1: f64, a2: f64) -> f64 {
    let s2 = sigma * sigma;
    1.0 / (1.0 + FOUR_PI2 * ell.0 * (a1 * a1 + 4.0 * s2 * a2 * a2) * s2)
}

pub fn reg_ramp_hat(sigma: f64, ell: Ell) -> f64 {
    sigma.abs() * t_hat(sigma, ell)
}

/// `(pi / sqrt(ell)) exp(-2 pi r / sqrt(ell))`, for comparison only: its 1D
/// transform is `1 / (1 + ell sigma^2)`, and it is not the 2D inverse of `k_hat`.
pub fn k_spatial(radius: f64, ell: Ell) -> Result<f64> {
    if ell.0 == 0.0 {
        return Err(Error::NotPositive { what: "ell", value: 0.0 });
    }
    let s = ell.0.sqrt();
    Ok(PI / s * (-2.0 * PI * radius.abs() / s).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    FrameK { ell: Ell },
    SinoT { ell: Ell },
    AnisoKEps { ell: Ell, epsilon: f64 },
    DerivK { ell: Ell, n: DerivOrder },
    DerivT { ell: Ell, n: DerivOrder },
    GeneralizedY { ell: Ell, a1: f64, a2: f64 },
    RegRamp { ell: Ell },
}

impl KernelSpec {
    pub fn aniso(ell: Ell, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Epsilon(epsilon));
        }
        Ok(KernelSpec::AnisoKEps { ell, epsilon })
    }

    /// Value at 2D frequency `q`; the 1D families act on `q[0]`.
    pub fn eval(&self, q: [f64; 2]) -> f64 {
        match *self {
            KernelSpec::FrameK { ell } => k_hat(q, ell),
            KernelSpec::SinoT { ell } => t_hat(q[0], ell),
            KernelSpec::AnisoKEps { ell, epsilon } => {
                lorentz(FOUR_PI2 * (q[0] * q[0] + epsilon * q[1] * q[1]), ell.0, DerivOrder::Zero)
            }
            KernelSpec::DerivK { ell, n } => lorentz(FOUR_PI2 * (q[0] * q[0] + q[1] * q[1]), ell.0, n),
            KernelSpec::DerivT { ell, n } => lorentz(FOUR_PI2 * q[0] * q[0], ell.0, n),
            KernelSpec::GeneralizedY { ell, a1, a2 } => generalized_y_hat(q[0], ell, a1, a2),
            KernelSpec::RegRamp { ell } => reg_ramp_hat(q[0], ell),
        }
    }
}

/// Kernel sampled once on every DFT bin of a grid.
#[derive(Debug, Clone)]
pub struct DenseKernel {
    spec: KernelSpec,
    grid: Grid2D,
    values: Array2<f64>,
}

impl DenseKernel {
    pub fn build(spec: KernelSpec, grid: Grid2D) -> Self {
        let values = Array2::from_shape_fn(grid.shape(), |(r, c)| spec.eval(grid.q(r, c)));
        Self { spec, grid, values }
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}
