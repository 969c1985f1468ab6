use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pre- and post-selected states are orthogonal (overlap {overlap:e}); the weak value diverges")]
    OrthogonalStates { overlap: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("post-selection probability {p_d:e} is too small to define a density")]
    DegenerateModel { p_d: f64 },

    #[error("singular denominator ({value:e})")]
    SingularDenominator { value: f64 },

    #[error("coupling g is zero; the optimal weak value diverges")]
    ZeroCoupling,

    #[error("time delay is zero")]
    ZeroDelay,

    #[error("Fisher information must be positive, got {value:e}")]
    NonpositiveInformation { value: f64 },

    #[error("no photon survived post-selection (iteration {iteration})")]
    InsufficientStatistics { iteration: usize },

    #[error("no sign flip within {iterations} iterations")]
    MaxIterations { iterations: usize },

    #[error("log-likelihood is flat over the search grid (spread {spread:e})")]
    FlatLikelihood { spread: f64 },
}

/// A small-parameter assumption that an input violates. Closed forms stay
/// computable outside their validity region; these flags say so.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidityFlag {
    /// `|g x0| >= 0.1`.
    WeakCoupling,
    /// The weak value is not large (`|Im A_w| < 10`).
    LargeWeakValue,
    /// Outside the linear window `|omega0 tau - eps| <= 0.3 delta tau`.
    LinearShiftWindow,
    /// Initial post-selection angle outside `[0.001, 0.1]`.
    InitialAngleRange,
    /// Analytic and finite-difference Fisher information disagree.
    DerivativeCrossCheck,
}

impl fmt::Display for ValidityFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValidityFlag::WeakCoupling => "weak-coupling",
            ValidityFlag::LargeWeakValue => "large-weak-value",
            ValidityFlag::LinearShiftWindow => "linear-shift-window",
            ValidityFlag::InitialAngleRange => "initial-angle-range",
            ValidityFlag::DerivativeCrossCheck => "derivative-cross-check",
        };
        f.write_str(s)
    }
}
