//! Single-distance phase retrieval filters and a maximum-curvature rule for
//! choosing their regularization parameter, with the tomography,
//! simulation and verification pieces needed to exercise them.

pub mod dispersion;
pub mod error;
pub mod fft;
pub mod filters;
pub mod grid;
pub mod kernels;
pub mod quad;
pub mod select;
pub mod simulate;
pub mod tomo;
pub mod variational;

pub use error::{Error, Result};
pub use filters::{Frame, Mode, Profile, RetrievedMap, Sinogram};
pub use grid::{CutoffMask, Grid1D, Grid2D};
pub use kernels::Ell;
pub use tomo::Slice;
