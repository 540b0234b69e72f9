//! Quadratic Wasserstein distance on the line, computed as the L² distance between
//! quantile functions.
//!
//! Two step functions are compared exactly by merging their partitions. A step
//! function against an analytic law is integrated piece by piece with closed-form
//! or Gauss–Legendre rules. Everything else goes through a composite midpoint rule
//! whose cells are split at the jumps of either argument, so the rule never
//! straddles a discontinuity and never evaluates at α ∈ {0, 1}.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::distribution::AnalyticDistribution;
use super::quantile::{Quantile, QuantileFunction, StepQuantile};
use crate::error::{Error, Result};
use crate::numeric::{gl16_partition, pairwise_sum};
use crate::theory::order_stat_moments;

pub const DEFAULT_GRID_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMethod {
    ExactStep,
    PiecewiseAnalytic,
    ExactShift,
    Quadrature,
}

impl fmt::Display for DistanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExactStep => "exact-step",
            Self::PiecewiseAnalytic => "piecewise-analytic",
            Self::ExactShift => "exact-shift",
            Self::Quadrature => "quadrature",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub method: DistanceMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureOptions {
    /// Number of uniform α-cells of the composite midpoint rule.
    pub grid_size: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

/// `∫₀¹ (F_a⁻ - F_b⁻)² dα` with the default quadrature resolution.
pub fn wasserstein2_squared(a: &QuantileFunction, b: &QuantileFunction) -> Result<f64> {
    wasserstein2_squared_with(a, b, &QuadratureOptions::default()).map(|d| d.value)
}

pub fn wasserstein2_squared_with(
    a: &QuantileFunction,
    b: &QuantileFunction,
    opts: &QuadratureOptions,
) -> Result<Distance> {
    use QuantileFunction::*;
    if opts.grid_size == 0 {
        return Err(Error::InvalidParameter("quadrature grid size must be positive".into()));
    }
    let (value, method) = match (a, b) {
        (Step(x), Step(y)) => (exact_step_w2(x, y), DistanceMethod::ExactStep),
        (Step(s), Analytic { dist, shift }) | (Analytic { dist, shift }, Step(s)) => {
            (step_to_analytic_w2(s, dist, *shift), DistanceMethod::PiecewiseAnalytic)
        }
        (Analytic { dist: d1, shift: s1 }, Analytic { dist: d2, shift: s2 }) if d1 == d2 => {
            ((s1 - s2).powi(2), DistanceMethod::ExactShift)
        }
        _ => (quadrature_w2(a, b, opts.grid_size), DistanceMethod::Quadrature),
    };
    if !value.is_finite() {
        return Err(Error::Precision(
            "squared distance is not finite; are both second moments finite?".into(),
        ));
    }
    Ok(Distance { value, method })
}

/// Exact distance between two step quantile functions by partition merging.
pub fn exact_step_w2(a: &StepQuantile, b: &StepQuantile) -> f64 {
    let (ab, bb) = (a.breaks(), b.breaks());
    let (av, bv) = (a.values(), b.values());
    let mut parts = Vec::with_capacity(ab.len() + bb.len() + 1);
    let (mut i, mut j) = (0, 0);
    let mut lo = 0.0;
    loop {
        let next_a = ab.get(i).copied().unwrap_or(1.0);
        let next_b = bb.get(j).copied().unwrap_or(1.0);
        let hi = next_a.min(next_b);
        parts.push((av[i] - bv[j]).powi(2) * (hi - lo));
        if hi >= 1.0 {
            break;
        }
        if next_a == hi {
            i += 1;
        }
        if next_b == hi {
            j += 1;
        }
        lo = hi;
    }
    pairwise_sum(&parts)
}

/// Distance between a step quantile and `F⁻_dist + shift`, piece by piece.
pub fn step_to_analytic_w2(step: &StepQuantile, dist: &AnalyticDistribution, shift: f64) -> f64 {
    let parts: Vec<f64> = step
        .pieces()
        .map(|(lo, hi, v)| dist.squared_deviation(v - shift, lo, hi))
        .collect();
    pairwise_sum(&parts)
}

/// Composite midpoint rule on `grid_size` uniform cells, split at jumps of either input.
/// The outer 1/64 of the cells at each end use Gauss–Legendre panels instead, graded
/// towards α = 0 and α = 1, so unbounded quantile tails are integrated accurately.
pub fn quadrature_w2<A, B>(a: &A, b: &B, grid_size: usize) -> f64
where
    A: Quantile + ?Sized,
    B: Quantile + ?Sized,
{
    let width = 1.0 / grid_size as f64;
    // cells near α ∈ {0, 1} get Gauss–Legendre panels; midpoint error there decays only like 1/k²
    let end_zone = (grid_size / 64).max(1);
    let (ja, jb) = (a.jumps(), b.jumps());
    let (mut ia, mut ib) = (0, 0);
    let mut parts = Vec::with_capacity(grid_size);
    let mut cuts = Vec::new();
    for k in 0..grid_size {
        let lo = k as f64 * width;
        let hi = if k + 1 == grid_size {
            1.0
        } else {
            (k + 1) as f64 * width
        };
        cuts.clear();
        while ia < ja.len() && ja[ia] < hi {
            if ja[ia] > lo {
                cuts.push(ja[ia]);
            }
            ia += 1;
        }
        while ib < jb.len() && jb[ib] < hi {
            if jb[ib] > lo {
                cuts.push(jb[ib]);
            }
            ib += 1;
        }
        let end_cell = k < end_zone || k + end_zone >= grid_size;
        if cuts.is_empty() && !end_cell {
            let mid = (k as f64 + 0.5) * width;
            parts.push((a.quantile(mid) - b.quantile(mid)).powi(2) * width);
            continue;
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut left = lo;
        let mut cell = 0.0;
        for &right in cuts.iter().chain(std::iter::once(&hi)) {
            if end_cell {
                // quantiles may be unbounded at 0 and 1: grade the panels towards the ends
                let sq = |t: f64| (a.quantile(t) - b.quantile(t)).powi(2);
                cell += graded_gl16(left, right, left == 0.0, right == 1.0, sq);
            } else {
                let mid = 0.5 * (left + right);
                cell += (a.quantile(mid) - b.quantile(mid)).powi(2) * (right - left);
            }
            left = right;
        }
        parts.push(cell);
    }
    pairwise_sum(&parts)
}

/// Gauss–Legendre panels on `[lo, hi]`, halving geometrically towards each flagged end.
fn graded_gl16<F: Fn(f64) -> f64>(lo: f64, hi: f64, grade_lo: bool, grade_hi: bool, f: F) -> f64 {
    // the smallest panel stays at least 2^-40 wide so its nodes are distinct from 0 and 1
    let levels = |width: f64| (width.log2() + 40.0).floor().max(0.0) as i32;
    let mut points = vec![lo];
    let (inner_lo, inner_hi) = match (grade_lo, grade_hi) {
        (true, true) => (lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo)),
        (true, false) => (lo + 0.5 * (hi - lo), hi),
        (false, true) => (lo, hi - 0.5 * (hi - lo)),
        (false, false) => (lo, hi),
    };
    if grade_lo {
        for k in (1..=levels(inner_lo - lo)).rev() {
            points.push(lo + (inner_lo - lo) * 0.5f64.powi(k));
        }
        points.push(inner_lo);
    }
    if grade_hi {
        points.push(inner_hi);
        for k in 1..=levels(hi - inner_hi) {
            points.push(hi - (hi - inner_hi) * 0.5f64.powi(k));
        }
    }
    points.push(hi);
    points.dedup();
    gl16_partition(&points, f)
}

/// `E[d_W²(μ_p, ν₀)]` for the empirical measure `μ_p` of `p` iid draws from `dist`.
///
/// Uses the closed form `(hi - lo)² / (6p)` for uniform laws, otherwise the
/// decomposition `(1/p) Σ Var(Y*_j) + Σ ∫_{((j-1)/p, j/p]} (E[Y*_j] - F⁻(α))² dα`.
pub fn expected_w2_empirical_to_target(dist: &AnalyticDistribution, p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    if let AnalyticDistribution::Uniform { lo, hi } = dist {
        return Ok((hi - lo).powi(2) / (6.0 * p as f64));
    }
    let (variance_part, bias_part) = empirical_risk_decomposition(dist, p)?;
    Ok(variance_part + bias_part)
}

/// The two terms `((1/p) Σ Var(Y*_j), Σ ∫ (E[Y*_j] - F⁻)²)` of the expected
/// squared distance between an empirical measure and its population law.
pub fn empirical_risk_decomposition(dist: &AnalyticDistribution, p: usize) -> Result<(f64, f64)> {
    let moments = order_stat_moments(dist, p)?;
    let pf = p as f64;
    let variance_part = pairwise_sum(moments.variances()) / pf;
    let bias: Vec<f64> = moments
        .means()
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let lo = j as f64 / pf;
            let hi = if j + 1 == p { 1.0 } else { (j + 1) as f64 / pf };
            dist.squared_deviation(m, lo, hi)
        })
        .collect();
    Ok((variance_part, pairwise_sum(&bias)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::EmpiricalMeasure;

    fn emp(v: &[f64]) -> QuantileFunction {
        EmpiricalMeasure::new(v.to_vec()).unwrap().to_quantile()
    }

    #[test]
    fn diracs_at_zero_and_one() {
        assert_eq!(wasserstein2_squared(&emp(&[0.0]), &emp(&[1.0])).unwrap(), 1.0);
    }

    #[test]
    fn identity_is_zero() {
        let q = emp(&[0.3, -2.0, 5.0]);
        assert_eq!(wasserstein2_squared(&q, &q).unwrap(), 0.0);
    }

    #[test]
    fn shifted_pair() {
        let d = wasserstein2_squared(&emp(&[0.0, 1.0]), &emp(&[0.5, 1.5])).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unequal_sizes_use_merged_partition() {
        // {0, 1} vs {0, 0.5, 1}: pieces (0,1/3]:0, (1/3,1/2]:0.25, (1/2,2/3]:0.25, (2/3,1]:0
        let d = wasserstein2_squared(&emp(&[0.0, 1.0]), &emp(&[0.0, 0.5, 1.0])).unwrap();
        assert!((d - 0.25 * (1.0 / 6.0) - 0.25 * (1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn step_against_uniform() {
        let u = QuantileFunction::analytic(AnalyticDistribution::standard_uniform());
        let d = wasserstein2_squared_with(&emp(&[0.0]), &u, &Default::default()).unwrap();
        assert_eq!(d.method, DistanceMethod::PiecewiseAnalytic);
        assert!((d.value - 1.0 / 3.0).abs() < 1e-14);
        let d = wasserstein2_squared(&emp(&[0.5]), &u).unwrap();
        assert!((d - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn shifted_analytic_pair_is_exact() {
        let g = AnalyticDistribution::standard_gaussian();
        let a = QuantileFunction::Analytic {
            dist: g.clone(),
            shift: 0.25,
        };
        let b = QuantileFunction::Analytic { dist: g, shift: -0.5 };
        let d = wasserstein2_squared_with(&a, &b, &Default::default()).unwrap();
        assert_eq!(d.method, DistanceMethod::ExactShift);
        assert_eq!(d.value, 0.5625);
    }

    #[test]
    fn gaussian_scale_pair_by_quadrature() {
        // d² between N(0,1) and N(0,4) is (2-1)² = 1
        let a = QuantileFunction::analytic(AnalyticDistribution::standard_gaussian());
        let b = QuantileFunction::analytic(AnalyticDistribution::gaussian(0.0, 2.0).unwrap());
        let d = wasserstein2_squared_with(&a, &b, &QuadratureOptions { grid_size: 4096 }).unwrap();
        assert_eq!(d.method, DistanceMethod::Quadrature);
        assert!((d.value - 1.0).abs() < 1e-6, "{}", d.value);
    }

    #[test]
    fn uniform_expected_distance_closed_form() {
        let u = AnalyticDistribution::standard_uniform();
        assert!((expected_w2_empirical_to_target(&u, 1).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((expected_w2_empirical_to_target(&u, 10).unwrap() - 1.0 / 60.0).abs() < 1e-15);
        // the general decomposition reproduces the closed form
        for p in 1..=12 {
            let (v, b) = empirical_risk_decomposition(&u, p).unwrap();
            assert!((v + b - 1.0 / (6.0 * p as f64)).abs() < 1e-13, "p={p}");
        }
    }

    #[test]
    fn exponential_variance_part_is_harmonic() {
        let e = AnalyticDistribution::exponential(1.0).unwrap();
        for p in [1usize, 4, 17] {
            let (v, _) = empirical_risk_decomposition(&e, p).unwrap();
            let h: f64 = (1..=p).map(|j| 1.0 / j as f64).sum();
            assert!((v - h / p as f64).abs() < 1e-14);
        }
    }
}
