//! Kernel smoothing of empirical measures on [0, 1] and on the line.

mod bandwidth;
mod kernel;
mod mixture;

pub use bandwidth::{
    cv_bandwidth, cv_candidates, lscv_score, oversmoothed_bandwidth, select_bandwidth, silverman_bandwidth,
    BandwidthRule, DEFAULT_CV_CANDIDATES,
};
pub use kernel::{BaseKernel, BoundaryKernelMeasure, UserKernel};
pub use mixture::{SmoothedMeasure, SmoothingKernel};

use crate::numeric::std_normal_cdf;

/// Upper bound `3h² + 4Ψ(-1/√h)` on `d_W²(μ_h^y, δ_y)` for the Gaussian base kernel.
pub fn kernel_distance_bound(h: f64) -> f64 {
    3.0 * h * h + 4.0 * std_normal_cdf(-1.0 / h.sqrt())
}

/// `d_W²(μ_h^y, δ_y) = ∫₀¹ (x - y)² f(x) dx`.
pub fn kernel_distance_to_centre(k: &BoundaryKernelMeasure) -> crate::Result<f64> {
    let y = k.centre();
    let f = |x: f64| (x - y).powi(2) * k.pdf(x);
    let mut total = 0.0;
    if y > 0.0 {
        total += crate::numeric::adaptive_simpson(&f, 0.0, y, 1e-14)?;
    }
    if y < 1.0 {
        total += crate::numeric::adaptive_simpson(&f, y, 1.0, 1e-14)?;
    }
    Ok(total)
}
