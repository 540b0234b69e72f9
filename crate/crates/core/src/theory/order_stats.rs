use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::measures::AnalyticDistribution;
use crate::numeric::{gauss_legendre_16, graded_unit_partition, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
}

/// Means and variances of the order statistics `Y*_1 <= ... <= Y*_p` of `p` iid draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStatMoments {
    p: usize,
    means: Vec<f64>,
    variances: Vec<f64>,
    method: MomentMethod,
}

impl OrderStatMoments {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn method(&self) -> MomentMethod {
        self.method
    }

    pub fn variance_sum(&self) -> f64 {
        pairwise_sum(&self.variances)
    }
}

/// Order-statistic moments: closed forms for uniform and exponential laws, otherwise
/// beta-weighted quadrature of `F⁻` after the substitution `α = F(x)`.
pub fn order_stat_moments(dist: &AnalyticDistribution, p: usize) -> Result<OrderStatMoments> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    let pf = p as f64;
    match dist {
        AnalyticDistribution::Uniform { lo, hi } => {
            let w = hi - lo;
            let means = (1..=p).map(|j| lo + w * j as f64 / (pf + 1.0)).collect();
            let variances = (1..=p)
                .map(|j| {
                    let j = j as f64;
                    w * w * j * (pf - j + 1.0) / ((pf + 1.0).powi(2) * (pf + 2.0))
                })
                .collect();
            Ok(OrderStatMoments {
                p,
                means,
                variances,
                method: MomentMethod::ClosedForm,
            })
        }
        AnalyticDistribution::OneSidedExponential { rate } => {
            // Rényi: Y*_j = Σ_{k<=j} E_k / (p - k + 1) with iid standard exponentials E_k
            let mut means = Vec::with_capacity(p);
            let mut variances = Vec::with_capacity(p);
            let (mut m, mut v) = (0.0, 0.0);
            for k in 1..=p {
                let inv = 1.0 / (pf - k as f64 + 1.0);
                m += inv;
                v += inv * inv;
                means.push(m / rate);
                variances.push(v / (rate * rate));
            }
            Ok(OrderStatMoments {
                p,
                means,
                variances,
                method: MomentMethod::ClosedForm,
            })
        }
        _ => cached_quadrature_moments(dist, p).map(|m| (*m).clone()),
    }
}

type MomentCache = RwLock<HashMap<(String, usize), Arc<OrderStatMoments>>>;

fn cached_quadrature_moments(dist: &AnalyticDistribution, p: usize) -> Result<Arc<OrderStatMoments>> {
    static CACHE: OnceLock<MomentCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (format!("{dist:?}"), p);
    if let Some(hit) = cache.read().expect("moment cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let fresh = Arc::new(quadrature_moments(dist, p)?);
    // Concurrent fills compute identical values, so last writer wins harmlessly.
    cache.write().expect("moment cache poisoned").insert(key, fresh.clone());
    Ok(fresh)
}

fn quadrature_moments(dist: &AnalyticDistribution, p: usize) -> Result<OrderStatMoments> {
    let pf = p as f64;
    let partition = graded_unit_partition((4 * p).max(64), 48);
    let (gl_nodes, gl_weights) = gauss_legendre_16();
    let mut alphas = Vec::with_capacity(16 * partition.len());
    let mut weights = Vec::with_capacity(alphas.capacity());
    for w in partition.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[1] + w[0]);
        for (x, g) in gl_nodes.iter().zip(gl_weights) {
            alphas.push(mid + half * x);
            weights.push(g * half);
        }
    }
    let values: Vec<f64> = alphas.iter().map(|&a| dist.quantile(a)).collect();
    let ln_a: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let ln_1ma: Vec<f64> = alphas.iter().map(|a| (-a).ln_1p()).collect();
    let ln_fact_p = ln_gamma(pf + 1.0);

    let mut means = Vec::with_capacity(p);
    let mut variances = Vec::with_capacity(p);
    let mut terms = vec![0.0; alphas.len()];
    let mut beta = vec![0.0; alphas.len()];
    for j in 1..=p {
        let jf = j as f64;
        let ln_c = ln_fact_p - ln_gamma(jf) - ln_gamma(pf - jf + 1.0);
        for k in 0..alphas.len() {
            beta[k] = weights[k] * (ln_c + (jf - 1.0) * ln_a[k] + (pf - jf) * ln_1ma[k]).exp();
        }
        let mass = pairwise_sum(&beta);
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::Precision(format!(
                "beta weights for j = {j}, p = {p} integrate to {mass}"
            )));
        }
        for k in 0..alphas.len() {
            terms[k] = beta[k] * values[k];
        }
        let mean = pairwise_sum(&terms);
        for k in 0..alphas.len() {
            terms[k] = beta[k] * (values[k] - mean).powi(2);
        }
        let var = pairwise_sum(&terms);
        if !(mean.is_finite() && var.is_finite()) {
            return Err(Error::Precision(format!(
                "order-statistic moments of {dist} diverge at j = {j}, p = {p}"
            )));
        }
        means.push(mean);
        variances.push(var.max(0.0));
    }
    if means.windows(2).any(|w| w[1] < w[0] - 1e-12) {
        return Err(Error::Precision("order-statistic means are not monotone".into()));
    }
    Ok(OrderStatMoments {
        p,
        means,
        variances,
        method: MomentMethod::Quadrature,
    })
}
