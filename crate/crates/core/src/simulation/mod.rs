//! Seeded random-measure models and the Monte Carlo risk harness.

mod harness;
mod model;

pub use harness::{
    log_ratio_to_csv, mean_and_se, monte_carlo_risk, monte_carlo_risk_multi, reports_to_csv, risk_grid, CellIndex,
    EstimatorSpec, LogRatio, RiskGrid, RiskReport, CSV_HEADER,
};
pub use model::{open_unit, sub_seed, MeasureModel, UnitDraw};
