use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations grouped by unit: `units[i]` holds the `pᵢ` draws from the i-th random measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedDataset {
    units: Vec<Vec<f64>>,
    support: Option<(f64, f64)>,
}

impl GroupedDataset {
    pub fn new(units: Vec<Vec<f64>>, support: Option<(f64, f64)>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::Domain("a dataset needs at least one unit".into()));
        }
        if let Some((lo, hi)) = support {
            if !(lo < hi) {
                return Err(Error::InvalidParameter(format!("support [{lo}, {hi}] is empty")));
            }
        }
        for (i, unit) in units.iter().enumerate() {
            if unit.is_empty() {
                return Err(Error::Domain(format!("unit {i} has no observations")));
            }
            if let Some(x) = unit.iter().find(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("unit {i} contains the non-finite value {x}")));
            }
            if let Some((lo, hi)) = support {
                if let Some(x) = unit.iter().find(|&&x| x < lo || x > hi) {
                    return Err(Error::SupportMismatch(format!(
                        "unit {i} contains {x}, outside the declared support [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(Self { units, support })
    }

    pub fn units(&self) -> &[Vec<f64>] {
        &self.units
    }

    pub fn n(&self) -> usize {
        self.units.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.units.iter().map(Vec::len).collect()
    }

    /// The common unit size, when every unit has the same number of draws.
    pub fn equal_size(&self) -> Option<usize> {
        let p = self.units[0].len();
        self.units.iter().all(|u| u.len() == p).then_some(p)
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// Applies `x ↦ scale x + shift` to every observation and to the declared support.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return Err(Error::InvalidParameter(
                "affine map needs a positive finite scale".into(),
            ));
        }
        let units = self
            .units
            .iter()
            .map(|u| u.iter().map(|x| scale * x + shift).collect())
            .collect();
        Self::new(
            units,
            self.support.map(|(lo, hi)| (scale * lo + shift, scale * hi + shift)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_units() {
        assert!(GroupedDataset::new(vec![], None).is_err());
        assert!(GroupedDataset::new(vec![vec![]], None).is_err());
        assert!(GroupedDataset::new(vec![vec![f64::NAN]], None).is_err());
        assert!(matches!(
            GroupedDataset::new(vec![vec![0.5, 1.5]], Some((0.0, 1.0))),
            Err(Error::SupportMismatch(_))
        ));
    }

    #[test]
    fn equal_size_detection() {
        let d = GroupedDataset::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], None).unwrap();
        assert_eq!(d.equal_size(), Some(2));
        let d = GroupedDataset::new(vec![vec![1.0], vec![3.0, 4.0]], None).unwrap();
        assert_eq!(d.equal_size(), None);
        assert_eq!(d.sizes(), vec![1, 2]);
    }
}
