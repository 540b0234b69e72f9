//! Parsers for the textual option values.

use wbary::measures::AnalyticDistribution;
use wbary::simulation::MeasureModel;
use wbary::smoothing::BandwidthRule;

use crate::error::CliError;

fn numbers(args: &str, what: &str) -> Result<Vec<f64>, CliError> {
    args.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("{what}: cannot parse {t:?} as a number")))
        })
        .collect()
}

fn split_spec(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((name, args)) => (name.trim(), Some(args)),
        None => (s.trim(), None),
    }
}

/// `uniform[:lo,hi]`, `gaussian[:mean,sd]` or `exponential[:rate]`; defaults are the standard laws.
pub fn parse_distribution(s: &str) -> Result<AnalyticDistribution, CliError> {
    let (name, args) = split_spec(s);
    let args = args.map(|a| numbers(a, name)).transpose()?;
    let bad = || CliError::input(format!("wrong number of parameters in distribution {s:?}"));
    let dist = match (name, args.as_deref()) {
        ("uniform", None) => AnalyticDistribution::standard_uniform(),
        ("uniform", Some([lo, hi])) => AnalyticDistribution::uniform(*lo, *hi)?,
        ("gaussian", None) => AnalyticDistribution::standard_gaussian(),
        ("gaussian", Some([m, sd])) => AnalyticDistribution::gaussian(*m, *sd)?,
        ("exponential", None) => AnalyticDistribution::exponential(1.0)?,
        ("exponential", Some([rate])) => AnalyticDistribution::exponential(*rate)?,
        ("uniform" | "gaussian" | "exponential", Some(_)) => return Err(bad()),
        _ => return Err(CliError::input(format!("unsupported distribution {name:?}"))),
    };
    Ok(dist)
}

/// Simulation models:
/// `deterministic-uniform`, `shift-uniform:<delta>`, `shift-gaussian:<delta>[,sd]`,
/// `location-scale-gaussian` (the figure study, truncated to [-7, 7]) and
/// `location-scale-gaussian-untruncated`.
pub fn parse_model(s: &str) -> Result<MeasureModel, CliError> {
    let (name, args) = split_spec(s);
    let args = args.map(|a| numbers(a, name)).transpose()?;
    let bad = || CliError::input(format!("wrong number of parameters in model {s:?}"));
    let model = match (name, args.as_deref()) {
        ("deterministic-uniform", None) => MeasureModel::Deterministic {
            base: AnalyticDistribution::standard_uniform(),
        },
        ("shift-uniform", Some([d])) => MeasureModel::LocationShiftOfBase {
            base: AnalyticDistribution::standard_uniform(),
            b: (-d, *d),
        },
        ("shift-gaussian", Some([d])) => MeasureModel::LocationShiftOfBase {
            base: AnalyticDistribution::standard_gaussian(),
            b: (-d, *d),
        },
        ("shift-gaussian", Some([d, sd])) => MeasureModel::LocationShiftOfBase {
            base: AnalyticDistribution::gaussian(0.0, *sd)?,
            b: (-d, *d),
        },
        ("location-scale-gaussian", None) => MeasureModel::figure_study(),
        ("location-scale-gaussian-untruncated", None) => match MeasureModel::figure_study() {
            MeasureModel::LocationScaleGaussian { mean, sd, a, b, .. } => MeasureModel::LocationScaleGaussian {
                mean,
                sd,
                a,
                b,
                truncation: None,
            },
            other => other,
        },
        ("deterministic-uniform" | "location-scale-gaussian" | "location-scale-gaussian-untruncated", Some(_))
        | ("shift-uniform" | "shift-gaussian", _) => return Err(bad()),
        _ => return Err(CliError::input(format!("unknown model {name:?}"))),
    };
    model.validate()?;
    Ok(model)
}

/// `silverman`, `cv` or `fixed:<h>`.
pub fn parse_bandwidth(s: &str) -> Result<BandwidthRule, CliError> {
    match split_spec(s) {
        ("silverman", None) => Ok(BandwidthRule::Silverman),
        ("cv", None) => Ok(BandwidthRule::default()),
        ("fixed", Some(h)) => {
            let h: f64 = h
                .trim()
                .parse()
                .map_err(|_| CliError::input(format!("cannot parse bandwidth {h:?}")))?;
            if h > 0.0 && h.is_finite() {
                Ok(BandwidthRule::Fixed { h })
            } else {
                Err(CliError::input(format!("bandwidth must be positive, got {h}")))
            }
        }
        _ => Err(CliError::input(format!(
            "unknown bandwidth rule {s:?}; use silverman, cv or fixed:<h>"
        ))),
    }
}

/// A positive integer or a comma-separated list of them.
pub fn parse_counts(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(CliError::input(format!(
                "{what}: expected a positive integer, got {t:?}"
            ))),
        })
        .collect()
}
