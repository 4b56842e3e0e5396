use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid needs at least 2 samples per axis, got {0}")]
    GridTooSmall(usize),
    #[error("sampling step must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("cutoff multiplier must be positive, got {0}")]
    BadCutoff(f64),
    #[error("regularization parameter must be finite and nonnegative, got {0}")]
    NegativeEll(f64),
    #[error("{what} must be positive, got {value}")]
    NotPositive { what: &'static str, value: f64 },
    #[error("epsilon must lie in [0, 1], got {0}")]
    Epsilon(f64),
    #[error("derivative order {0} unsupported (expected 0, 1 or 2)")]
    DerivOrder(u8),
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape { expected: Vec<usize>, got: Vec<usize> },
    #[error("nonpositive intensity {value} at flat index {index}")]
    NonPositive { index: usize, value: f64 },
    #[error("filtered field reached {value} <= 0 at flat index {index} before the log")]
    FilteredNonPositive { index: usize, value: f64 },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("angles must be at least 2, strictly increasing, in [0, pi)")]
    Angles,
    #[error("input has no energy in the admitted band")]
    Degenerate,
    #[error("curvature has no interior maximum on [{lo:e}, {hi:e}]")]
    NoInteriorMax { lo: f64, hi: f64 },
    #[error("invalid bracket [{lo:e}, {hi:e}] or grid size {points}")]
    Bracket { lo: f64, hi: f64, points: usize },
    #[error("ell*(m) - L does not change sign over m in [{lo:e}, {hi:e}]")]
    NoCrossing { lo: f64, hi: f64 },
    #[error("grid must span [-1, 1]")]
    GridTooNarrow,
    #[error("propagated intensity {value} <= 0 at flat index {index}: L too large for this phantom")]
    Propagation { index: usize, value: f64 },
    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// True for failures of the numerics (solver, positivity, quadrature)
    /// rather than of the inputs themselves.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate
                | Error::NoInteriorMax { .. }
                | Error::NoCrossing { .. }
                | Error::Propagation { .. }
                | Error::FilteredNonPositive { .. }
                | Error::Quadrature { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
