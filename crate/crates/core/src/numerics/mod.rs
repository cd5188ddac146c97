//! Numerical kernels shared by every policy.

mod linalg;
mod quantile;
mod rng;

pub use linalg::{dot, ols_fit, predictive_variance, DesignMatrix, LeastSquares, RewardVector, RidgeSolver};
pub use quantile::{interval_halfwidth, normal_cdf, normal_pdf, normal_quantile};
pub use rng::{Purpose, RngStream, StreamId};

/// Ridge used by the policies so that every round has a well-defined fit.
pub const DEFAULT_RIDGE: f64 = 1e-6;
