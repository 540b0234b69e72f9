use serde::{Deserialize, Serialize};

use super::quantile::{Quantile, QuantileFunction, StepQuantile};
use crate::error::{Error, Result};
use crate::numeric::pairwise_mean;

/// Equal-weight atoms of one sample group, kept sorted.
///
/// The quantile function is the step function taking the `j`-th order statistic on
/// `((j-1)/p, j/p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Builds the measure from unsorted samples. Ties are kept.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("empirical measure needs at least one atom".into()));
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample value {bad}")));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { atoms: samples })
    }

    /// Builds the measure from samples that must already be sorted.
    pub fn from_sorted(atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("empirical measure needs at least one atom".into()));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite sample value".into()));
        }
        if atoms.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvariantViolation("atoms are not sorted".into()));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        pairwise_mean(&self.atoms)
    }

    pub fn into_atoms(self) -> Vec<f64> {
        self.atoms
    }

    /// Step quantile function with breakpoints `j/p`.
    pub fn to_quantile(&self) -> QuantileFunction {
        let p = self.atoms.len();
        let breaks = (1..p).map(|j| j as f64 / p as f64).collect();
        QuantileFunction::Step(StepQuantile::from_parts_unchecked(breaks, self.atoms.clone()))
    }
}

/// Index of the atom that carries level `alpha` for a measure with `p` atoms.
pub(crate) fn step_index(alpha: f64, p: usize) -> usize {
    let pf = p as f64;
    let mut k = (alpha * pf).ceil().clamp(1.0, pf) as usize;
    while k > 1 && alpha <= (k - 1) as f64 / pf {
        k -= 1;
    }
    while k < p && alpha > k as f64 / pf {
        k += 1;
    }
    k - 1
}

impl Quantile for EmpiricalMeasure {
    fn quantile(&self, alpha: f64) -> f64 {
        self.atoms[step_index(alpha, self.atoms.len())]
    }
}
