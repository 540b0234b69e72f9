use serde::{Deserialize, Serialize};

use super::distribution::AnalyticDistribution;
use crate::error::{Error, Result};

/// Anything that can be evaluated as a quantile function on (0, 1).
pub trait Quantile {
    fn quantile(&self, alpha: f64) -> f64;

    /// Levels in (0, 1) where the function may jump. Quadrature splits cells there.
    fn jumps(&self) -> &[f64] {
        &[]
    }
}

/// Piecewise-constant quantile: `values[k]` on `(breaks[k-1], breaks[k]]`, with
/// `breaks[-1] = 0` and `breaks[len] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepQuantile {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepQuantile {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("step quantile needs at least one piece".into()));
        }
        if breaks.len() + 1 != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                values.len()
            )));
        }
        if breaks.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::InvariantViolation(
                "breakpoints must lie strictly inside (0, 1)".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvariantViolation("breakpoints must increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation("step values must be finite".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvariantViolation(
                "quantile values must be non-decreasing".into(),
            ));
        }
        Ok(Self { breaks, values })
    }

    pub(crate) fn from_parts_unchecked(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(breaks.len() + 1, values.len());
        Self { breaks, values }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(lo, hi, value)` for every piece, in increasing order.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.values.len();
        (0..n).map(move |k| {
            let lo = if k == 0 { 0.0 } else { self.breaks[k - 1] };
            let hi = if k + 1 == n { 1.0 } else { self.breaks[k] };
            (lo, hi, self.values[k])
        })
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        self.values[self.breaks.partition_point(|&b| b < alpha)]
    }
}

/// Quantile sampled on a strictly increasing α-grid, interpolated linearly between
/// nodes and held constant beyond the outermost nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridQuantile {
    alphas: Vec<f64>,
    values: Vec<f64>,
}

impl GridQuantile {
    pub fn new(alphas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() || alphas.len() != values.len() {
            return Err(Error::InvalidParameter(
                "grid quantile needs matching non-empty α and value lists".into(),
            ));
        }
        if alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::InvariantViolation("α-grid must lie inside (0, 1)".into()));
        }
        if alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvariantViolation("α-grid must increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation("grid values must be finite".into()));
        }
        if let Some(k) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvariantViolation(format!(
                "grid quantile decreases between α = {} and α = {}",
                alphas[k],
                alphas[k + 1]
            )));
        }
        Ok(Self { alphas, values })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        let n = self.alphas.len();
        if alpha <= self.alphas[0] {
            return self.values[0];
        }
        if alpha >= self.alphas[n - 1] {
            return self.values[n - 1];
        }
        let k = self.alphas.partition_point(|&a| a <= alpha) - 1;
        if self.alphas[k] == alpha {
            return self.values[k];
        }
        let t = (alpha - self.alphas[k]) / (self.alphas[k + 1] - self.alphas[k]);
        self.values[k] + t * (self.values[k + 1] - self.values[k])
    }
}

/// The common currency of the barycenter computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum QuantileFunction {
    Step(StepQuantile),
    Grid(GridQuantile),
    /// `F⁻_dist(α) + shift`.
    Analytic {
        dist: AnalyticDistribution,
        shift: f64,
    },
}

impl QuantileFunction {
    pub fn analytic(dist: AnalyticDistribution) -> Self {
        Self::Analytic { dist, shift: 0.0 }
    }

    /// Closure of the support of the underlying measure.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Step(s) => (s.values[0], s.values[s.values.len() - 1]),
            Self::Grid(g) => (g.values[0], g.values[g.values.len() - 1]),
            Self::Analytic { dist, shift } => {
                let (lo, hi) = dist.support();
                (lo + shift, hi + shift)
            }
        }
    }

    pub fn as_step(&self) -> Option<&StepQuantile> {
        match self {
            Self::Step(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridQuantile> {
        match self {
            Self::Grid(g) => Some(g),
            _ => None,
        }
    }
}

impl Quantile for QuantileFunction {
    fn quantile(&self, alpha: f64) -> f64 {
        match self {
            Self::Step(s) => s.eval(alpha),
            Self::Grid(g) => g.eval(alpha),
            Self::Analytic { dist, shift } => dist.quantile(alpha) + shift,
        }
    }

    fn jumps(&self) -> &[f64] {
        match self {
            Self::Step(s) => &s.breaks,
            _ => &[],
        }
    }
}
