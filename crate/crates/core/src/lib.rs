//! Distributionally robust risk measures for loss positions whose law is
//! only known up to a Wasserstein-penalized neighbourhood of a prior.
//!
//! The robust functionals are computed through their dual form, which turns
//! the supremum over laws into nested one-dimensional convex minimizations
//! over the location `m` and the transport multiplier `lambda`.

pub mod distributions;
pub mod dual_oracle;
pub mod error;
pub mod losses;
pub mod optim;
pub mod penalizations;
pub mod risk_measures;
pub mod robust;

pub use distributions::{Empirical, PriorDistribution};
pub use error::{Result, RiskError};
pub use dual_oracle::{dual_expectile_max, wasserstein_1d, DensityBand, Direction};
pub use losses::{check_l_membership, CostExponent, CustomLoss, LossSpec, PowerLoss};
pub use optim::Interval;
pub use penalizations::{Breakpoint, Penalization};
pub use risk_measures::{
    expectile, robust_expectile_ball, robust_expectile_linear, robust_generalized_quantile, var, ExpectileLevel,
};
pub use robust::{classical_oce, robust_functional, robust_oce, RobustValue, SearchOptions};
