//! Estimators of the population barycenter from grouped observations.
//!
//! On the line the barycenter quantile is the average of the unit quantiles, so each
//! estimator averages some per-unit quantile function: empirical, kernel-smoothed, or
//! a known reference shape shifted by the estimated location.

mod dataset;

pub use dataset::GroupedDataset;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{
    wasserstein2_squared_with, AnalyticDistribution, EmpiricalMeasure, GridQuantile, QuadratureOptions,
    QuantileFunction, StepQuantile, DEFAULT_GRID_SIZE,
};
use crate::numeric::{midpoint_grid, pairwise_mean};
use crate::smoothing::{select_bandwidth, BandwidthRule, BaseKernel, SmoothedMeasure, SmoothingKernel};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum EstimatorKind {
    NonSmoothed,
    Smoothed {
        kernel: KernelChoice,
        bandwidths: Vec<f64>,
    },
    ParametricLocation {
        reference: AnalyticDistribution,
        shift: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    /// Boundary-corrected Gaussian kernel; requires the support [0, 1].
    #[default]
    BoundaryGaussian,
    /// Plain Gaussian kernel on the line.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarycenterEstimate {
    pub quantile: QuantileFunction,
    pub kind: EstimatorKind,
    pub n: usize,
    pub sizes: Vec<usize>,
    pub seed: Option<u64>,
}

impl BarycenterEstimate {
    /// The atoms, when the estimate is an equal-weight empirical measure.
    pub fn atoms(&self) -> Option<&[f64]> {
        let step = self.quantile.as_step()?;
        let p = step.values().len();
        let regular = step
            .breaks()
            .iter()
            .enumerate()
            .all(|(j, &b)| b == (j + 1) as f64 / p as f64);
        regular.then(|| step.values())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// The empirical barycenter: the average of the unit step quantile functions.
///
/// With equal sizes this averages the j-th order statistics and returns `p` atoms.
/// Otherwise the averaged step function lives on the merged breakpoints `{j/pᵢ}`.
pub fn nonsmoothed_barycenter(data: &GroupedDataset) -> Result<BarycenterEstimate> {
    let quantile = match data.equal_size() {
        Some(p) => equal_size_average(data, p)?,
        None => merged_average(data)?,
    };
    Ok(BarycenterEstimate {
        quantile,
        kind: EstimatorKind::NonSmoothed,
        n: data.n(),
        sizes: data.sizes(),
        seed: None,
    })
}

fn sorted_units(data: &GroupedDataset) -> Vec<Vec<f64>> {
    data.units()
        .iter()
        .map(|u| {
            let mut u = u.clone();
            u.sort_by(f64::total_cmp);
            u
        })
        .collect()
}

fn equal_size_average(data: &GroupedDataset, p: usize) -> Result<QuantileFunction> {
    let units = sorted_units(data);
    let mut column = vec![0.0; units.len()];
    let atoms = (0..p)
        .map(|j| {
            for (c, u) in column.iter_mut().zip(&units) {
                *c = u[j];
            }
            pairwise_mean(&column)
        })
        .collect();
    Ok(EmpiricalMeasure::from_sorted(atoms)?.to_quantile())
}

/// The average of unit step quantiles on the merged partition `{j/pᵢ}`.
pub fn merged_average(data: &GroupedDataset) -> Result<QuantileFunction> {
    let units = sorted_units(data);
    let mut breaks: Vec<f64> = units
        .iter()
        .flat_map(|u| {
            let p = u.len();
            (1..p).map(move |j| j as f64 / p as f64)
        })
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    // piece k is (breaks[k-1], breaks[k]]; unit i takes its atom at index ⌈α pᵢ⌉ - 1
    let mut cursor = vec![0usize; units.len()];
    let mut column = vec![0.0; units.len()];
    let mut values = Vec::with_capacity(breaks.len() + 1);
    for k in 0..=breaks.len() {
        let lo = if k == 0 { 0.0 } else { breaks[k - 1] };
        for (i, u) in units.iter().enumerate() {
            let p = u.len() as f64;
            while cursor[i] + 1 < u.len() && (cursor[i] + 1) as f64 / p <= lo {
                cursor[i] += 1;
            }
            column[i] = u[cursor[i]];
        }
        values.push(pairwise_mean(&column));
    }
    Ok(QuantileFunction::Step(StepQuantile::new(breaks, values)?))
}

/// How per-unit bandwidths are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidths {
    Rule(BandwidthRule),
    PerUnit(Vec<f64>),
}

impl Default for Bandwidths {
    fn default() -> Self {
        Self::Rule(BandwidthRule::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingOptions {
    pub kernel: KernelChoice,
    pub bandwidths: Bandwidths,
    /// Number of α-midpoints the barycenter quantile is evaluated on.
    pub grid_size: usize,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        Self {
            kernel: KernelChoice::default(),
            bandwidths: Bandwidths::default(),
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

/// Per-unit bandwidths under `opts`, validated.
pub fn unit_bandwidths(data: &GroupedDataset, bandwidths: &Bandwidths) -> Result<Vec<f64>> {
    let hs = match bandwidths {
        Bandwidths::PerUnit(hs) => {
            if hs.len() != data.n() {
                return Err(Error::InvalidParameter(format!(
                    "{} bandwidths given for {} units",
                    hs.len(),
                    data.n()
                )));
            }
            hs.clone()
        }
        Bandwidths::Rule(rule) => data
            .units()
            .iter()
            .map(|u| select_bandwidth(u, *rule))
            .collect::<Result<_>>()?,
    };
    if let Some(h) = hs.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    Ok(hs)
}

/// The smoothed barycenter: unit kernel-smoothed quantiles averaged on an α-grid.
pub fn smoothed_barycenter(data: &GroupedDataset, opts: &SmoothingOptions) -> Result<BarycenterEstimate> {
    if opts.grid_size == 0 {
        return Err(Error::InvalidParameter("grid size must be positive".into()));
    }
    let kernel = match opts.kernel {
        KernelChoice::BoundaryGaussian => {
            if data.support() != Some((0.0, 1.0)) {
                return Err(Error::SupportMismatch(
                    "the boundary-corrected kernel needs the declared support [0, 1]; \
                     use the plain Gaussian kernel otherwise"
                        .into(),
                ));
            }
            SmoothingKernel::Boundary(BaseKernel::Gaussian)
        }
        KernelChoice::Gaussian => SmoothingKernel::Gaussian,
    };
    let hs = unit_bandwidths(data, &opts.bandwidths)?;
    let alphas = midpoint_grid(opts.grid_size);
    let per_unit: Vec<Vec<f64>> = data
        .units()
        .par_iter()
        .zip(&hs)
        .map(|(u, &h)| SmoothedMeasure::new(u, h, kernel.clone())?.quantiles(&alphas))
        .collect::<Result<_>>()?;
    let values = average_columns(&per_unit, alphas.len());
    Ok(BarycenterEstimate {
        quantile: QuantileFunction::Grid(GridQuantile::new(alphas, values)?),
        kind: EstimatorKind::Smoothed {
            kernel: opts.kernel,
            bandwidths: hs,
        },
        n: data.n(),
        sizes: data.sizes(),
        seed: None,
    })
}

fn average_columns(rows: &[Vec<f64>], len: usize) -> Vec<f64> {
    let mut column = vec![0.0; rows.len()];
    (0..len)
        .map(|k| {
            for (c, r) in column.iter_mut().zip(rows) {
                *c = r[k];
            }
            pairwise_mean(&column)
        })
        .collect()
}

/// The reference shape shifted by `â = (1/n) Σᵢ X̄ᵢ - m₀`.
pub fn parametric_location_estimate(
    data: &GroupedDataset,
    reference: &AnalyticDistribution,
) -> Result<BarycenterEstimate> {
    let m0 = reference.mean();
    if !m0.is_finite() {
        return Err(Error::UnsupportedDistribution(format!(
            "{reference} has no finite mean"
        )));
    }
    let unit_means: Vec<f64> = data.units().iter().map(|u| pairwise_mean(u)).collect();
    let shift = pairwise_mean(&unit_means) - m0;
    Ok(BarycenterEstimate {
        quantile: QuantileFunction::Analytic {
            dist: reference.clone(),
            shift,
        },
        kind: EstimatorKind::ParametricLocation {
            reference: reference.clone(),
            shift,
        },
        n: data.n(),
        sizes: data.sizes(),
        seed: None,
    })
}

/// `(1/n) Σᵢ d_W²(ν̃ᵢ, μ)`, the objective the empirical barycenter minimises.
pub fn frechet_objective(data: &GroupedDataset, candidate: &QuantileFunction) -> Result<f64> {
    let opts = QuadratureOptions::default();
    let terms: Vec<f64> = data
        .units()
        .iter()
        .map(|u| {
            let q = EmpiricalMeasure::new(u.clone())?.to_quantile();
            wasserstein2_squared_with(&q, candidate, &opts).map(|d| d.value)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_mean(&terms))
}
