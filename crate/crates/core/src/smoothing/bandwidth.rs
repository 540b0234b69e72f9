use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{pairwise_mean, pairwise_sum};

pub const DEFAULT_CV_CANDIDATES: usize = 24;

/// How a per-unit bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BandwidthRule {
    /// `0.9 min(sd, IQR/1.34) p^{-1/5}`.
    Silverman,
    /// Least-squares cross-validation for a Gaussian kernel over a log-spaced grid
    /// spanning `[h_OS/10, h_OS]`, with `h_OS` the oversmoothed bandwidth.
    CrossValidation {
        candidates: usize,
    },
    Fixed {
        h: f64,
    },
}

impl Default for BandwidthRule {
    fn default() -> Self {
        Self::CrossValidation {
            candidates: DEFAULT_CV_CANDIDATES,
        }
    }
}

pub fn select_bandwidth(samples: &[f64], rule: BandwidthRule) -> Result<f64> {
    match rule {
        BandwidthRule::Silverman => silverman_bandwidth(samples),
        BandwidthRule::CrossValidation { candidates } => cv_bandwidth(samples, candidates),
        BandwidthRule::Fixed { h } if h > 0.0 && h.is_finite() => Ok(h),
        BandwidthRule::Fixed { h } => Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}"))),
    }
}

/// Silverman's rule of thumb. The IQR uses the left-continuous empirical quantile;
/// a zero IQR falls back to the standard deviation.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let p = samples.len();
    if p < 2 {
        return Err(Error::DegenerateSample(format!(
            "bandwidth needs at least 2 samples, got {p}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[p - 1] {
        return Err(Error::DegenerateSample("all samples are identical".into()));
    }
    let mean = pairwise_mean(&sorted);
    let squares: Vec<f64> = sorted.iter().map(|x| (x - mean).powi(2)).collect();
    let sd = (pairwise_sum(&squares) / (p - 1) as f64).sqrt();
    let q = |a: f64| sorted[((a * p as f64).ceil() as usize).clamp(1, p) - 1];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (p as f64).powf(-0.2))
}

/// Terrell's oversmoothed bandwidth `1.144 sd p^{-1/5}` for the Gaussian kernel, an
/// upper bound on any sensible bandwidth.
pub fn oversmoothed_bandwidth(samples: &[f64]) -> Result<f64> {
    // validates the sample and rejects degenerate ones
    silverman_bandwidth(samples)?;
    let p = samples.len() as f64;
    let mean = pairwise_mean(samples);
    let squares: Vec<f64> = samples.iter().map(|x| (x - mean).powi(2)).collect();
    let sd = (pairwise_sum(&squares) / (p - 1.0)).sqrt();
    Ok(1.144 * sd * p.powf(-0.2))
}

/// Log-spaced candidate bandwidths between `h_OS/10` and `h_OS`.
pub fn cv_candidates(samples: &[f64], count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::InvalidParameter(
            "cross-validation needs at least 2 candidates".into(),
        ));
    }
    let upper = oversmoothed_bandwidth(samples)?;
    let (lo, hi) = ((0.1 * upper).ln(), upper.ln());
    Ok((0..count)
        .map(|k| (lo + (hi - lo) * k as f64 / (count - 1) as f64).exp())
        .collect())
}

/// Squared pairwise differences `(X_i - X_j)²`, `i < j`, in increasing order.
fn sorted_square_gaps(samples: &[f64]) -> Vec<f64> {
    let mut gaps = Vec::with_capacity(samples.len() * (samples.len().saturating_sub(1)) / 2);
    for (i, &x) in samples.iter().enumerate() {
        for &y in &samples[i + 1..] {
            gaps.push((x - y) * (x - y));
        }
    }
    gaps.sort_by(f64::total_cmp);
    gaps
}

fn lscv_from_gaps(gaps: &[f64], p: usize, h: f64) -> f64 {
    let pf = p as f64;
    let scale = 1.0 / (4.0 * h * h);
    let (mut conv, mut loo) = (0.0, 0.0);
    for &d2 in gaps {
        let t = d2 * scale;
        if t > 40.0 {
            break;
        }
        let e = (-t).exp();
        conv += e;
        loo += e * e;
    }
    // ∫ f̂² = (1/p²) Σ_{i,j} φ_{h√2}(X_i - X_j), leave-one-out term uses φ_h
    let integral = (pf + 2.0 * conv) / (pf * pf * 2.0 * h * PI.sqrt());
    let cross = 4.0 * loo / (pf * (pf - 1.0) * h * (2.0 * PI).sqrt());
    integral - cross
}

/// Least-squares cross-validation score of a Gaussian kernel density estimate.
pub fn lscv_score(samples: &[f64], h: f64) -> f64 {
    lscv_from_gaps(&sorted_square_gaps(samples), samples.len(), h)
}

pub fn cv_bandwidth(samples: &[f64], candidates: usize) -> Result<f64> {
    let grid = cv_candidates(samples, candidates)?;
    let gaps = sorted_square_gaps(samples);
    let mut best = (f64::INFINITY, grid[0]);
    for &h in &grid {
        let score = lscv_from_gaps(&gaps, samples.len(), h);
        if score < best.0 {
            best = (score, h);
        }
    }
    Ok(best.1)
}
