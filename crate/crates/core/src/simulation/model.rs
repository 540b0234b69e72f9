use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::barycenter::GroupedDataset;
use crate::error::{Error, Result};
use crate::measures::{AnalyticDistribution, QuantileFunction};
use crate::numeric::{std_normal_cdf, std_normal_quantile};

/// A law for the random measure `ν` generating each unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureModel {
    /// `νᵢ` has density `Cᵢ aᵢ⁻¹ f₀((x - bᵢ)/aᵢ)` for a Gaussian `f₀`, with
    /// `aᵢ ~ U(a_lo, a_hi)`, `bᵢ ~ U(b_lo, b_hi)`, optionally truncated to `Ω`.
    LocationScaleGaussian {
        mean: f64,
        sd: f64,
        a: (f64, f64),
        b: (f64, f64),
        truncation: Option<(f64, f64)>,
    },
    /// `νᵢ` is `base` shifted by `bᵢ ~ U(b_lo, b_hi)`.
    LocationShiftOfBase { base: AnalyticDistribution, b: (f64, f64) },
    /// Every unit is drawn from `base`.
    Deterministic { base: AnalyticDistribution },
}

/// One realisation `νᵢ` of the random measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitDraw {
    pub scale: f64,
    pub shift: f64,
}

impl MeasureModel {
    /// The simulation model of the figure study: `a ~ U(0.8, 1.2)`, `b ~ U(-2, 2)`,
    /// standard Gaussian `f₀` truncated to `[-7, 7]`.
    pub fn figure_study() -> Self {
        Self::LocationScaleGaussian {
            mean: 0.0,
            sd: 1.0,
            a: (0.8, 1.2),
            b: (-2.0, 2.0),
            truncation: Some((-7.0, 7.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let interval = |name: &str, (lo, hi): (f64, f64)| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::Model(format!(
                    "{name} law U({lo}, {hi}) is not a valid interval"
                )))
            }
        };
        match self {
            Self::LocationScaleGaussian {
                mean,
                sd,
                a,
                b,
                truncation,
            } => {
                interval("a", *a)?;
                interval("b", *b)?;
                if a.0 <= 0.0 {
                    return Err(Error::Model("scale law must stay positive".into()));
                }
                if !(mean.is_finite() && *sd > 0.0 && sd.is_finite()) {
                    return Err(Error::Model("base Gaussian needs a finite mean and positive sd".into()));
                }
                if let Some((lo, hi)) = truncation {
                    if !(lo < hi) {
                        return Err(Error::Model(format!("truncation [{lo}, {hi}] is empty")));
                    }
                }
                Ok(())
            }
            Self::LocationShiftOfBase { b, .. } => interval("b", *b),
            Self::Deterministic { .. } => Ok(()),
        }
    }

    /// The declared support `Ω`, when the model has a bounded one.
    pub fn support(&self) -> Option<(f64, f64)> {
        let bounded = |d: &AnalyticDistribution, (blo, bhi): (f64, f64)| {
            let (lo, hi) = d.support();
            (lo.is_finite() && hi.is_finite()).then_some((lo + blo, hi + bhi))
        };
        match self {
            Self::LocationScaleGaussian { truncation, .. } => *truncation,
            Self::LocationShiftOfBase { base, b } => bounded(base, *b),
            Self::Deterministic { base } => bounded(base, (0.0, 0.0)),
        }
    }

    /// The law whose quantile, shifted, is the population barycenter `ν₀`.
    ///
    /// For the truncated Gaussian model this is the untruncated barycenter; the
    /// truncation at `Ω` is ignored here.
    pub fn population_barycenter(&self) -> Result<QuantileFunction> {
        Ok(match self {
            Self::LocationScaleGaussian { mean, sd, a, b, .. } => {
                let (ea, eb) = (0.5 * (a.0 + a.1), 0.5 * (b.0 + b.1));
                QuantileFunction::analytic(AnalyticDistribution::gaussian(eb + ea * mean, ea * sd)?)
            }
            Self::LocationShiftOfBase { base, b } => QuantileFunction::Analytic {
                dist: base.clone(),
                shift: 0.5 * (b.0 + b.1),
            },
            Self::Deterministic { base } => QuantileFunction::analytic(base.clone()),
        })
    }

    /// `V = E[d_W²(ν, ν₀)] = ∫₀¹ Var(F⁻_ν(α)) dα` (untruncated for the Gaussian model).
    pub fn between_variance(&self) -> f64 {
        let var = |(lo, hi): (f64, f64)| (hi - lo).powi(2) / 12.0;
        match self {
            Self::LocationScaleGaussian { mean, sd, a, b, .. } => var(*b) + var(*a) * (mean * mean + sd * sd),
            Self::LocationShiftOfBase { b, .. } => var(*b),
            Self::Deterministic { .. } => 0.0,
        }
    }

    pub fn draw_unit<R: RngCore>(&self, rng: &mut R) -> UnitDraw {
        match self {
            Self::LocationScaleGaussian { a, b, .. } => {
                let scale = uniform(rng, *a);
                let shift = uniform(rng, *b);
                UnitDraw { scale, shift }
            }
            Self::LocationShiftOfBase { b, .. } => UnitDraw {
                scale: 1.0,
                shift: uniform(rng, *b),
            },
            Self::Deterministic { .. } => UnitDraw { scale: 1.0, shift: 0.0 },
        }
    }

    /// The quantile function of the unit measure `νᵢ` (untruncated for the Gaussian model).
    pub fn unit_quantile(&self, unit: UnitDraw) -> Result<QuantileFunction> {
        Ok(match self {
            Self::LocationScaleGaussian { mean, sd, .. } => QuantileFunction::analytic(AnalyticDistribution::gaussian(
                unit.shift + unit.scale * mean,
                unit.scale * sd,
            )?),
            Self::LocationShiftOfBase { base, .. } => QuantileFunction::Analytic {
                dist: base.clone(),
                shift: unit.shift,
            },
            Self::Deterministic { base } => QuantileFunction::analytic(base.clone()),
        })
    }

    /// `count` iid draws from `νᵢ` by inverse-cdf sampling.
    pub fn sample_unit<R: RngCore>(&self, unit: UnitDraw, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            Self::LocationScaleGaussian {
                mean, sd, truncation, ..
            } => {
                let (lo, hi) = match truncation {
                    Some((lo, hi)) => (
                        std_normal_cdf(((lo - unit.shift) / unit.scale - mean) / sd),
                        std_normal_cdf(((hi - unit.shift) / unit.scale - mean) / sd),
                    ),
                    None => (0.0, 1.0),
                };
                if !(hi > lo) {
                    return Err(Error::Model(format!(
                        "unit with scale {} and shift {} puts no mass on the truncation window",
                        unit.scale, unit.shift
                    )));
                }
                let samples = (0..count)
                    .map(|_| {
                        let z = std_normal_quantile(lo + (hi - lo) * open_unit(rng));
                        unit.shift + unit.scale * (mean + sd * z)
                    })
                    .collect();
                Ok(samples)
            }
            Self::LocationShiftOfBase { base, .. } | Self::Deterministic { base } => {
                Ok((0..count).map(|_| unit.shift + base.quantile(open_unit(rng))).collect())
            }
        }
    }

    /// Draws `n` units and `sizes[i]` observations from each.
    pub fn draw_dataset_with<R: RngCore>(&self, rng: &mut R, sizes: &[usize]) -> Result<GroupedDataset> {
        self.validate()?;
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidParameter(
                "need at least one unit and one draw per unit".into(),
            ));
        }
        let units = sizes
            .iter()
            .map(|&p| {
                let unit = self.draw_unit(rng);
                self.sample_unit(unit, p, rng)
            })
            .collect::<Result<_>>()?;
        GroupedDataset::new(units, self.support())
    }

    pub fn draw_dataset(&self, sizes: &[usize], seed: u64) -> Result<GroupedDataset> {
        self.draw_dataset_with(&mut ChaCha8Rng::seed_from_u64(seed), sizes)
    }
}

impl fmt::Display for MeasureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LocationScaleGaussian {
                mean,
                sd,
                a,
                b,
                truncation,
            } => {
                write!(
                    f,
                    "location-scale-gaussian(N({mean},{sd}^2),a~U({},{}),b~U({},{})",
                    a.0, a.1, b.0, b.1
                )?;
                if let Some((lo, hi)) = truncation {
                    write!(f, ",omega=[{lo},{hi}]")?;
                }
                f.write_str(")")
            }
            Self::LocationShiftOfBase { base, b } => write!(f, "shift({base},b~U({},{}))", b.0, b.1),
            Self::Deterministic { base } => write!(f, "deterministic({base})"),
        }
    }
}

/// A uniform draw on the open interval (0, 1) from the top 53 bits.
pub fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn uniform<R: RngCore>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * open_unit(rng)
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one replication in one grid cell, derived from the master seed.
pub fn sub_seed(master: u64, n_index: usize, p_index: usize, replication: usize) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut h = mix(master.wrapping_add(GOLDEN));
    for part in [n_index as u64, p_index as u64, replication as u64] {
        h = mix(h ^ part.wrapping_add(GOLDEN).wrapping_mul(GOLDEN));
    }
    h
}
