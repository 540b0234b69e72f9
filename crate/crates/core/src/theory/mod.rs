//! Closed-form and bound-form risk formulas for the empirical barycenters.

mod j2;
mod order_stats;
mod risk;

pub use j2::j2_functional;
pub use order_stats::{order_stat_moments, MomentMethod, OrderStatMoments};
pub use risk::{
    exact_risk_bias_form, exact_risk_components, exact_risk_equal_p, parametric_location_risk, risk_upper_bounds,
    BoundCase, BoundMetric, BoundValue, ExactRisk, RiskBound, RiskFormulaInput, SampleSizes,
};
