use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::model::{sub_seed, MeasureModel};
use crate::barycenter::{
    nonsmoothed_barycenter, parametric_location_estimate, smoothed_barycenter, BarycenterEstimate, GroupedDataset,
    SmoothingOptions,
};
use crate::error::{Error, Result};
use crate::measures::{wasserstein2_squared_with, AnalyticDistribution, QuadratureOptions, QuantileFunction};
use crate::numeric::{pairwise_mean, pairwise_sum};
use crate::theory::SampleSizes;

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    NonSmoothed,
    Smoothed(SmoothingOptions),
    /// Known reference shape, estimated location.
    Parametric {
        reference: AnalyticDistribution,
    },
}

impl EstimatorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NonSmoothed => "nonsmoothed",
            Self::Smoothed(_) => "smoothed",
            Self::Parametric { .. } => "parametric",
        }
    }

    pub fn fit(&self, data: &GroupedDataset) -> Result<BarycenterEstimate> {
        match self {
            Self::NonSmoothed => nonsmoothed_barycenter(data),
            Self::Smoothed(opts) => smoothed_barycenter(data, opts),
            Self::Parametric { reference } => parametric_location_estimate(data, reference),
        }
    }

    fn grid_size(&self) -> usize {
        match self {
            Self::Smoothed(opts) => opts.grid_size,
            _ => QuadratureOptions::default().grid_size,
        }
    }
}

fn sizes_as_text<S: Serializer>(sizes: &SampleSizes, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(sizes)
}

/// Monte Carlo estimate of `E[d_W²(ν̂, ν₀)]` in one `(n, p)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub model: String,
    pub estimator: String,
    pub n: usize,
    #[serde(serialize_with = "sizes_as_text")]
    pub p: SampleSizes,
    #[serde(rename = "M")]
    pub replications: usize,
    pub risk: f64,
    pub se: f64,
    pub seed: u64,
    pub grid_size: usize,
    /// Wall-clock time of the cell; shared across estimators evaluated together.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Grid coordinates of a cell, used to derive per-replication seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellIndex {
    pub n: usize,
    pub p: usize,
}

pub fn monte_carlo_risk(
    model: &MeasureModel,
    estimator: &EstimatorSpec,
    n: usize,
    sizes: &SampleSizes,
    replications: usize,
    seed: u64,
) -> Result<RiskReport> {
    let mut reports = monte_carlo_risk_multi(
        model,
        std::slice::from_ref(estimator),
        n,
        sizes,
        replications,
        seed,
        CellIndex::default(),
    )?;
    Ok(reports.remove(0))
}

/// Risks of several estimators evaluated on the same simulated datasets.
pub fn monte_carlo_risk_multi(
    model: &MeasureModel,
    estimators: &[EstimatorSpec],
    n: usize,
    sizes: &SampleSizes,
    replications: usize,
    seed: u64,
    cell: CellIndex,
) -> Result<Vec<RiskReport>> {
    if replications < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 replications for a standard error".into(),
        ));
    }
    if estimators.is_empty() {
        return Err(Error::InvalidParameter("no estimator given".into()));
    }
    let unit_sizes = sizes.expand(n);
    if unit_sizes.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} sample sizes for {n} units",
            unit_sizes.len()
        )));
    }
    model.validate()?;
    let truth = model.population_barycenter()?;
    let start = Instant::now();
    let losses: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, cell.n, cell.p, r));
            let data = model.draw_dataset_with(&mut rng, &unit_sizes)?;
            estimators
                .iter()
                .map(|e| loss(&e.fit(&data)?.quantile, &truth, e.grid_size()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let wall_time = start.elapsed();

    Ok(estimators
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let values: Vec<f64> = losses.iter().map(|row| row[k]).collect();
            let (risk, se) = mean_and_se(&values);
            RiskReport {
                model: model.to_string(),
                estimator: e.name().to_string(),
                n,
                p: sizes.clone(),
                replications,
                risk,
                se,
                seed,
                grid_size: e.grid_size(),
                wall_time,
            }
        })
        .collect())
}

fn loss(estimate: &QuantileFunction, truth: &QuantileFunction, grid_size: usize) -> Result<f64> {
    wasserstein2_squared_with(estimate, truth, &QuadratureOptions { grid_size }).map(|d| d.value)
}

/// Sample mean and its standard error `sd / √M` (sd with the `M - 1` denominator).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = pairwise_mean(values);
    let squares: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let sd = (pairwise_sum(&squares) / (m - 1.0)).sqrt();
    (mean, sd / m.sqrt())
}

/// All reports of a full factorial `n × p` sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskGrid {
    pub n_values: Vec<usize>,
    pub p_values: Vec<usize>,
    pub reports: Vec<RiskReport>,
}

/// One point of the surface `log(E[d_W²(ν̂_{n,p})] / E[d_W²(ν̂ʰ)])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRatio {
    pub n: usize,
    pub p: usize,
    pub log_ratio: f64,
}

impl RiskGrid {
    pub fn report(&self, estimator: &str, n: usize, p: usize) -> Option<&RiskReport> {
        self.reports
            .iter()
            .find(|r| r.estimator == estimator && r.n == n && r.p == SampleSizes::Equal(p))
    }

    /// `log(risk(numerator) / risk(denominator))` on every cell holding both.
    pub fn log_ratio_surface(&self, numerator: &str, denominator: &str) -> Vec<LogRatio> {
        let mut out = Vec::new();
        for &n in &self.n_values {
            for &p in &self.p_values {
                if let (Some(a), Some(b)) = (self.report(numerator, n, p), self.report(denominator, n, p)) {
                    out.push(LogRatio {
                        n,
                        p,
                        log_ratio: (a.risk / b.risk).ln(),
                    });
                }
            }
        }
        out
    }
}

/// Sweeps every `(n, p)` pair; each cell evaluates all estimators on shared datasets.
pub fn risk_grid(
    model: &MeasureModel,
    estimators: &[EstimatorSpec],
    n_values: &[usize],
    p_values: &[usize],
    replications: usize,
    seed: u64,
) -> Result<RiskGrid> {
    if n_values.is_empty() || p_values.is_empty() {
        return Err(Error::InvalidParameter("n and p grids must be non-empty".into()));
    }
    let mut reports = Vec::with_capacity(n_values.len() * p_values.len() * estimators.len());
    for (ni, &n) in n_values.iter().enumerate() {
        for (pi, &p) in p_values.iter().enumerate() {
            let cell = CellIndex { n: ni, p: pi };
            reports.extend(monte_carlo_risk_multi(
                model,
                estimators,
                n,
                &SampleSizes::Equal(p),
                replications,
                seed,
                cell,
            )?);
        }
    }
    Ok(RiskGrid {
        n_values: n_values.to_vec(),
        p_values: p_values.to_vec(),
        reports,
    })
}

pub const CSV_HEADER: &str = "model,estimator,n,p,M,risk,se,seed,grid_size";

/// Reports as CSV with 17 significant digits.
pub fn reports_to_csv(reports: &[RiskReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "\"{}\",{},{},{},{},{:.16e},{:.16e},{},{}",
            r.model, r.estimator, r.n, r.p, r.replications, r.risk, r.se, r.seed, r.grid_size
        );
    }
    out
}

/// Long-form CSV of a log-ratio surface.
pub fn log_ratio_to_csv(rows: &[LogRatio]) -> String {
    let mut out = String::from("n,p,log_ratio\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.16e}", r.n, r.p, r.log_ratio);
    }
    out
}
