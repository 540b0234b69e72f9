//! One-dimensional probability measures and the exact quadratic Wasserstein distance.

mod distance;
mod distribution;
mod empirical;
mod quantile;

pub use distance::{
    empirical_risk_decomposition, exact_step_w2, expected_w2_empirical_to_target, quadrature_w2, step_to_analytic_w2,
    wasserstein2_squared, wasserstein2_squared_with, Distance, DistanceMethod, QuadratureOptions, DEFAULT_GRID_SIZE,
};
pub use distribution::{AnalyticDistribution, CdfTable};
pub use empirical::EmpiricalMeasure;
pub use quantile::{GridQuantile, Quantile, QuantileFunction, StepQuantile};
