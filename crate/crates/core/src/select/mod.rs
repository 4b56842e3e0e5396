//! Choosing `ell` by the maximum curvature of `ln xi`.

mod calibrate;
mod energy;
mod search;

pub use calibrate::{
    affine_fit, calibrate_series, ell_star, m_sweep, physical_l, recover_series, AffineFit, MSweep, PhysicalParams,
    SweepPoint,
};
pub use energy::{
    xi_frame, xi_frame_residual, xi_slice, xi_slice_residual, Band, ModeEnergy, SelectInput, XiBundle,
};
pub use search::{
    curvature, golden_max, log_space, maximize_curvature, CurvatureAxis, CurvatureProfile, FindEllOptions, ProfileRecord, Refine,
};

use crate::error::Result;
use crate::filters::Mode;
use crate::grid::CutoffMask;

pub fn find_ell(input: SelectInput<'_>, mode: Mode, mask: CutoffMask, opts: &FindEllOptions) -> Result<CurvatureProfile> {
    ModeEnergy::new(input, mode)?.band(mask).find_ell(opts)
}
