//! Dataset and quantile file formats.
//!
//! A dataset file holds one unit per line, values separated by whitespace or commas.
//! Lines may differ in length and `#` starts a comment.
//!
//! A quantile file starts with `#` header lines, one of which is
//! `# representation: atoms|step|grid|analytic`. The body is one value per line for
//! `atoms`, `right_end value` pairs for `step` and `alpha value` pairs for `grid`.
//! `analytic` files carry `# reference:` and `# shift:` headers and no body.

use std::fmt::Write as _;

use wbary::barycenter::{BarycenterEstimate, EstimatorKind};
use wbary::measures::{AnalyticDistribution, EmpiricalMeasure, GridQuantile, QuantileFunction, StepQuantile};

use crate::error::CliError;
use crate::spec::parse_distribution;

/// Values of one line, or an error naming the line.
fn parse_line(line: &str, lineno: usize) -> Result<Vec<f64>, CliError> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let x: f64 = t
                .parse()
                .map_err(|_| CliError::input(format!("line {lineno}: cannot parse {t:?} as a number")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::input(format!("line {lineno}: non-finite value {t}")))
            }
        })
        .collect()
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// One unit per non-empty line.
pub fn parse_dataset(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut units = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let values = parse_line(strip_comment(line), k + 1)?;
        if !values.is_empty() {
            units.push(values);
        }
    }
    if units.is_empty() {
        return Err(CliError::input("dataset contains no observations"));
    }
    Ok(units)
}

/// Value of a `# key: value` header line.
fn header<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| {
        let rest = l.trim_start().strip_prefix('#')?.trim_start();
        let value = rest.strip_prefix(key)?.trim_start().strip_prefix(':')?;
        Some(value.trim())
    })
}

/// A file read by `distance`: either a quantile file or a plain list of samples.
pub fn parse_measure(text: &str) -> Result<QuantileFunction, CliError> {
    let Some(repr) = header(text, "representation") else {
        let samples: Vec<f64> = parse_dataset(text)?.into_iter().flatten().collect();
        return Ok(EmpiricalMeasure::new(samples)?.to_quantile());
    };
    let rows: Vec<(usize, Vec<f64>)> = text
        .lines()
        .enumerate()
        .map(|(k, l)| parse_line(strip_comment(l), k + 1).map(|v| (k + 1, v)))
        .filter(|r| !matches!(r, Ok((_, v)) if v.is_empty()))
        .collect::<Result<_, _>>()?;
    let columns = |want: usize| -> Result<Vec<Vec<f64>>, CliError> {
        rows.iter()
            .map(|(k, v)| {
                if v.len() == want {
                    Ok(v.clone())
                } else {
                    Err(CliError::input(format!(
                        "line {k}: expected {want} values, found {}",
                        v.len()
                    )))
                }
            })
            .collect()
    };
    match repr {
        "atoms" => {
            let atoms: Vec<f64> = columns(1)?.into_iter().map(|v| v[0]).collect();
            if atoms.windows(2).any(|w| w[1] < w[0]) {
                return Err(CliError::input("atoms must be listed in non-decreasing order"));
            }
            Ok(EmpiricalMeasure::from_sorted(atoms)?.to_quantile())
        }
        "step" => {
            let rows = columns(2)?;
            let Some(last) = rows.last() else {
                return Err(CliError::input("step file has no pieces"));
            };
            if last[0] != 1.0 {
                return Err(CliError::input("the last step piece must end at 1"));
            }
            let breaks = rows[..rows.len() - 1].iter().map(|r| r[0]).collect();
            let values = rows.iter().map(|r| r[1]).collect();
            Ok(QuantileFunction::Step(StepQuantile::new(breaks, values)?))
        }
        "grid" => {
            let rows = columns(2)?;
            let (alphas, values) = rows.iter().map(|r| (r[0], r[1])).unzip();
            Ok(QuantileFunction::Grid(GridQuantile::new(alphas, values)?))
        }
        "analytic" => {
            let dist = parse_distribution(
                header(text, "reference").ok_or_else(|| CliError::input("analytic file needs a reference header"))?,
            )?;
            let shift = match header(text, "shift") {
                Some(s) => s
                    .parse()
                    .map_err(|_| CliError::input(format!("cannot parse shift {s:?}")))?,
                None => 0.0,
            };
            Ok(QuantileFunction::Analytic { dist, shift })
        }
        other => Err(CliError::input(format!("unknown representation {other:?}"))),
    }
}

fn distribution_spec(d: &AnalyticDistribution) -> String {
    match d {
        AnalyticDistribution::Uniform { lo, hi } => format!("uniform:{lo:.16e},{hi:.16e}"),
        AnalyticDistribution::Gaussian { mean, sd } => format!("gaussian:{mean:.16e},{sd:.16e}"),
        AnalyticDistribution::OneSidedExponential { rate } => format!("exponential:{rate:.16e}"),
        AnalyticDistribution::UserTable(_) => "table".to_string(),
    }
}

/// The estimate as a quantile file, all numbers with 17 significant digits.
pub fn format_estimate(est: &BarycenterEstimate) -> String {
    let mut out = String::new();
    let estimator = match &est.kind {
        EstimatorKind::NonSmoothed => "nonsmoothed",
        EstimatorKind::Smoothed { .. } => "smoothed",
        EstimatorKind::ParametricLocation { .. } => "parametric",
    };
    let sizes: Vec<String> = est.sizes.iter().map(usize::to_string).collect();
    let _ = writeln!(out, "# estimator: {estimator}");
    let _ = writeln!(out, "# n: {}", est.n);
    let _ = writeln!(out, "# sizes: {}", sizes.join(","));
    if let EstimatorKind::Smoothed { kernel, bandwidths } = &est.kind {
        let hs: Vec<String> = bandwidths.iter().map(|h| format!("{h:.16e}")).collect();
        let kernel = serde_json::to_value(kernel)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let _ = writeln!(out, "# kernel: {kernel}");
        let _ = writeln!(out, "# bandwidths: {}", hs.join(","));
    }
    if let Some(seed) = est.seed {
        let _ = writeln!(out, "# seed: {seed}");
    }
    if let Some(atoms) = est.atoms() {
        out.push_str("# representation: atoms\n");
        for a in atoms {
            let _ = writeln!(out, "{a:.16e}");
        }
        return out;
    }
    match &est.quantile {
        QuantileFunction::Step(s) => {
            out.push_str("# representation: step\n");
            for (_, hi, v) in s.pieces() {
                let _ = writeln!(out, "{hi:.16e} {v:.16e}");
            }
        }
        QuantileFunction::Grid(g) => {
            out.push_str("# representation: grid\n");
            for (a, v) in g.alphas().iter().zip(g.values()) {
                let _ = writeln!(out, "{a:.16e} {v:.16e}");
            }
        }
        QuantileFunction::Analytic { dist, shift } => {
            out.push_str("# representation: analytic\n");
            let _ = writeln!(out, "# reference: {}", distribution_spec(dist));
            let _ = writeln!(out, "# shift: {shift:.16e}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_lines_and_comments() {
        let units = parse_dataset("# header\n0, 1 2\n\n3 # trailing\n").unwrap();
        assert_eq!(units, vec![vec![0.0, 1.0, 2.0], vec![3.0]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_dataset("1 2\n3 x\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_dataset("# nothing\n").is_err());
    }

    #[test]
    fn step_file_round_trip() {
        let q = parse_measure("# representation: step\n0.5 0\n1 0.5\n").unwrap();
        let s = q.as_step().unwrap();
        assert_eq!(s.breaks(), &[0.5]);
        assert_eq!(s.values(), &[0.0, 0.5]);
    }

    #[test]
    fn analytic_file() {
        let q = parse_measure("# representation: analytic\n# reference: gaussian:0,2\n# shift: 1.5\n").unwrap();
        assert_eq!(
            q,
            QuantileFunction::Analytic {
                dist: AnalyticDistribution::gaussian(0.0, 2.0).unwrap(),
                shift: 1.5
            }
        );
    }

    #[test]
    fn decreasing_grid_is_rejected() {
        assert!(parse_measure("# representation: grid\n0.25 1\n0.75 0\n").is_err());
    }
}
