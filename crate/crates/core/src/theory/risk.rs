use std::fmt;

use serde::Serialize;

use super::j2::j2_functional;
use super::order_stats::order_stat_moments;
use crate::error::{Error, Result};
use crate::measures::{empirical_risk_decomposition, expected_w2_empirical_to_target, AnalyticDistribution};

/// Per-unit sample sizes, either common or ragged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum SampleSizes {
    Equal(usize),
    PerUnit(Vec<usize>),
}

impl SampleSizes {
    /// The common size, if all units share one.
    pub fn common(&self) -> Option<usize> {
        match self {
            Self::Equal(p) => Some(*p),
            Self::PerUnit(v) => {
                let first = *v.first()?;
                v.iter().all(|&p| p == first).then_some(first)
            }
        }
    }

    /// The size vector for `n` units.
    pub fn expand(&self, n: usize) -> Vec<usize> {
        match self {
            Self::Equal(p) => vec![*p; n],
            Self::PerUnit(v) => v.clone(),
        }
    }
}

impl fmt::Display for SampleSizes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Equal(p) => write!(f, "{p}"),
            Self::PerUnit(v) => {
                let parts: Vec<String> = v.iter().map(|p| p.to_string()).collect();
                f.write_str(&parts.join(";"))
            }
        }
    }
}

/// Inputs shared by the exact risk formula and the upper bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskFormulaInput {
    pub n: usize,
    pub sizes: SampleSizes,
    /// `V = ∫₀¹ Var(F⁻(α)) dα`, the between-unit quantile variance.
    pub quantile_variance: f64,
    pub reference: AnalyticDistribution,
    /// `E[J₂(ν)]` of the random measure, when known.
    pub expected_j2: Option<f64>,
}

impl RiskFormulaInput {
    pub fn new(n: usize, sizes: SampleSizes, quantile_variance: f64, reference: AnalyticDistribution) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        match &sizes {
            SampleSizes::Equal(0) => return Err(Error::InvalidParameter("p must be at least 1".into())),
            SampleSizes::PerUnit(v) if v.len() != n || v.contains(&0) => {
                return Err(Error::InvalidParameter(format!(
                    "expected {n} positive sample sizes, got {v:?}"
                )))
            }
            _ => {}
        }
        if !(quantile_variance >= 0.0 && quantile_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "quantile variance must be finite and non-negative, got {quantile_variance}"
            )));
        }
        Ok(Self {
            n,
            sizes,
            quantile_variance,
            reference,
            expected_j2: None,
        })
    }

    pub fn with_expected_j2(mut self, value: f64) -> Self {
        self.expected_j2 = Some(value);
        self
    }

    fn equal_p(&self) -> Result<usize> {
        self.sizes
            .common()
            .ok_or_else(|| Error::InvalidParameter("this formula needs equal sample sizes".into()))
    }
}

/// The three terms of the exact risk for equal sample sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactRisk {
    /// `V / n`
    pub between_units: f64,
    /// `((1 - n) / (p n)) Σ Var(Y*_j)`
    pub order_stat_correction: f64,
    /// `E[d_W²(μ_p, ν₀)]`
    pub empirical_to_target: f64,
    pub total: f64,
}

pub fn exact_risk_components(input: &RiskFormulaInput) -> Result<ExactRisk> {
    let p = input.equal_p()?;
    let (n, pf) = (input.n as f64, p as f64);
    let variance_sum = order_stat_moments(&input.reference, p)?.variance_sum();
    let between_units = input.quantile_variance / n;
    let order_stat_correction = (1.0 - n) / (pf * n) * variance_sum;
    let empirical_to_target = expected_w2_empirical_to_target(&input.reference, p)?;
    Ok(ExactRisk {
        between_units,
        order_stat_correction,
        empirical_to_target,
        total: between_units + order_stat_correction + empirical_to_target,
    })
}

/// Exact `E[d_W²(ν̂_{n,p}, ν₀)]` of the non-smoothed barycenter with equal sample sizes.
pub fn exact_risk_equal_p(input: &RiskFormulaInput) -> Result<f64> {
    exact_risk_components(input).map(|r| r.total)
}

/// The same risk assembled as `V/n + (1/(pn)) Σ Var(Y*_j) + Σ ∫ (E[Y*_j] - F₀⁻)²`.
pub fn exact_risk_bias_form(input: &RiskFormulaInput) -> Result<f64> {
    let p = input.equal_p()?;
    let n = input.n as f64;
    let (variance_part, bias) = empirical_risk_decomposition(&input.reference, p)?;
    Ok(input.quantile_variance / n + variance_part / n + bias)
}

/// `E[d_W²(ν̂₀, ν₀)]` of the known-reference location estimator.
pub fn parametric_location_risk(reference_variance: f64, shift_variance: f64, sizes: &[usize]) -> f64 {
    let n = sizes.len() as f64;
    let inv_p: f64 = sizes.iter().map(|&p| 1.0 / p as f64).sum::<f64>() / n;
    let frac: f64 = sizes.iter().map(|&p| (p as f64 - 1.0) / p as f64).sum::<f64>() / n;
    (reference_variance + shift_variance) / n * inv_p + shift_variance / n * frac
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundCase {
    /// `V/n + 2/(p+1) J₂(ν₀)`
    GenericJ2,
    /// `V/n + c (1 + 1/n) log(p) / p` for the one-sided exponential.
    Exponential { c: Option<f64> },
    /// `V/n + c₂ (1/n + 1) log(log(p)) / p` for the standard Gaussian.
    Gaussian { c2: Option<f64> },
    /// Bound on `E[d_W]` for ragged sizes.
    GeneralP,
    /// Bound on `E[d_W]` for the smoothed barycenter.
    Smoothed { bandwidths: Vec<f64>, c_psi: Option<f64> },
}

impl BoundCase {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GenericJ2 => "generic_j2",
            Self::Exponential { .. } => "exponential",
            Self::Gaussian { .. } => "gaussian",
            Self::GeneralP => "general_p",
            Self::Smoothed { .. } => "smoothed",
        }
    }
}

/// Which risk a bound controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMetric {
    /// `E[d_W²]`
    SquaredDistance,
    /// `E[d_W]`
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundValue {
    Finite {
        value: f64,
    },
    /// A required functional is infinite, so the bound is vacuous.
    Infinite {
        reason: String,
    },
    /// `offset + coefficient * constant` with an existential constant left open.
    Symbolic {
        offset: f64,
        coefficient: f64,
        constant: String,
    },
    /// A required input was not supplied.
    Unavailable {
        reason: String,
    },
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite { value } => write!(f, "{value:.16e}"),
            Self::Infinite { reason } => write!(f, "infinite ({reason})"),
            Self::Symbolic {
                offset,
                coefficient,
                constant,
            } => {
                write!(f, "{offset:.16e} + {coefficient:.16e} * {constant}")
            }
            Self::Unavailable { reason } => write!(f, "unavailable ({reason})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskBound {
    pub case: &'static str,
    pub metric: BoundMetric,
    pub value: BoundValue,
}

fn with_constant(offset: f64, coefficient: f64, name: &str, constant: Option<f64>) -> BoundValue {
    match constant {
        Some(c) => BoundValue::Finite {
            value: offset + c * coefficient,
        },
        None => BoundValue::Symbolic {
            offset,
            coefficient,
            constant: name.to_string(),
        },
    }
}

/// Upper bounds on the risk of the empirical barycenters.
///
/// Existential constants that are not supplied stay symbolic in the result.
pub fn risk_upper_bounds(input: &RiskFormulaInput, case: &BoundCase) -> Result<RiskBound> {
    let n = input.n as f64;
    let v_over_n = input.quantile_variance / n;
    let (metric, value) = match case {
        BoundCase::GenericJ2 => {
            let p = input.equal_p()? as f64;
            let j2 = j2_functional(&input.reference)?;
            let value = if j2.is_infinite() {
                BoundValue::Infinite {
                    reason: format!("J2({}) = +inf", input.reference),
                }
            } else {
                BoundValue::Finite {
                    value: v_over_n + 2.0 / (p + 1.0) * j2,
                }
            };
            (BoundMetric::SquaredDistance, value)
        }
        BoundCase::Exponential { c } => {
            if !matches!(input.reference, AnalyticDistribution::OneSidedExponential { .. }) {
                return Err(Error::UnsupportedDistribution(format!(
                    "exponential bound needs an exponential reference, got {}",
                    input.reference
                )));
            }
            let p = input.equal_p()?;
            if p < 2 {
                return Err(Error::InvalidParameter("exponential bound needs p >= 2".into()));
            }
            let pf = p as f64;
            let coefficient = (1.0 + 1.0 / n) * pf.ln() / pf;
            (
                BoundMetric::SquaredDistance,
                with_constant(v_over_n, coefficient, "c", *c),
            )
        }
        BoundCase::Gaussian { c2 } => {
            if !matches!(input.reference, AnalyticDistribution::Gaussian { .. }) {
                return Err(Error::UnsupportedDistribution(format!(
                    "gaussian bound needs a gaussian reference, got {}",
                    input.reference
                )));
            }
            let p = input.equal_p()?;
            if p < 3 {
                return Err(Error::InvalidParameter("gaussian bound needs p >= 3".into()));
            }
            let pf = p as f64;
            let coefficient = (1.0 / n + 1.0) * pf.ln().ln() / pf;
            (
                BoundMetric::SquaredDistance,
                with_constant(v_over_n, coefficient, "c2", *c2),
            )
        }
        BoundCase::GeneralP | BoundCase::Smoothed { .. } => {
            let sizes = input.sizes.expand(input.n);
            let mean_inv_sqrt_p = sizes.iter().map(|&p| (p as f64).powf(-0.5)).sum::<f64>() / n;
            let base = (input.quantile_variance / n).sqrt();
            let value = match input.expected_j2 {
                None => BoundValue::Unavailable {
                    reason: "E[J2(nu)] not supplied".into(),
                },
                Some(ej2) if ej2.is_infinite() => BoundValue::Infinite {
                    reason: "E[J2(nu)] = +inf".into(),
                },
                Some(ej2) => {
                    let offset = base + (2.0 * ej2).sqrt() * mean_inv_sqrt_p;
                    match case {
                        BoundCase::Smoothed { bandwidths, c_psi } => {
                            if bandwidths.len() != input.n || bandwidths.iter().any(|&h| h <= 0.0) {
                                return Err(Error::InvalidParameter(
                                    "smoothed bound needs one positive bandwidth per unit".into(),
                                ));
                            }
                            let mean_h = bandwidths.iter().sum::<f64>() / n;
                            with_constant(offset, mean_h, "C_psi^(1/2)", c_psi.map(f64::sqrt))
                        }
                        _ => BoundValue::Finite { value: offset },
                    }
                }
            };
            (BoundMetric::Distance, value)
        }
    };
    Ok(RiskBound {
        case: case.name(),
        metric,
        value,
    })
}
