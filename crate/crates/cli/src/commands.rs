use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use wbary::barycenter::{
    nonsmoothed_barycenter, parametric_location_estimate, smoothed_barycenter, Bandwidths, GroupedDataset,
    KernelChoice, SmoothingOptions,
};
use wbary::measures::{wasserstein2_squared_with, AnalyticDistribution, QuadratureOptions, QuantileFunction};
use wbary::simulation::{
    log_ratio_to_csv, monte_carlo_risk_multi, reports_to_csv, risk_grid, CellIndex, EstimatorSpec, LogRatio,
    MeasureModel, RiskReport,
};
use wbary::theory::{
    exact_risk_components, order_stat_moments, risk_upper_bounds, BoundCase, ExactRisk, MomentMethod, RiskBound,
    RiskFormulaInput, SampleSizes,
};

use crate::error::CliError;
use crate::io::{format_estimate, parse_dataset, parse_measure};
use crate::spec::{parse_bandwidth, parse_counts, parse_distribution, parse_model};
use crate::{
    BarycenterArgs, DistanceArgs, EstimatorArgs, EstimatorName, KernelName, OutputFormat, RiskExactArgs, SimulateArgs,
};

pub const RISK_TABLE_SCHEMA: &str = "wbary.risk-table/v1";
pub const RISK_EXACT_SCHEMA: &str = "wbary.risk-exact/v1";

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn cmd_distance(args: &DistanceArgs) -> Result<String, CliError> {
    let load = |path: &Path| {
        parse_measure(&read(path)?).map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    };
    let a = load(&args.file_a)?;
    let b = load(&args.file_b)?;
    let opts = QuadratureOptions {
        grid_size: args.grid_size.unwrap_or(QuadratureOptions::default().grid_size),
    };
    let d = wasserstein2_squared_with(&a, &b, &opts)?;
    Ok(format!("d2 {:.16e}\nmethod {}\n", d.value, d.method))
}

/// Estimators of `args`, with mutually exclusive options rejected.
fn estimator_specs(
    args: &EstimatorArgs,
    default_reference: Option<AnalyticDistribution>,
) -> Result<Vec<EstimatorSpec>, CliError> {
    let names = &args.estimator;
    if names.is_empty() {
        return Err(CliError::input("no estimator given"));
    }
    if (1..names.len()).any(|k| names[..k].contains(&names[k])) {
        return Err(CliError::input("an estimator is listed twice"));
    }
    let smoothed = names.contains(&EstimatorName::Smoothed);
    let parametric = names.contains(&EstimatorName::Parametric);
    if !smoothed && (args.kernel.is_some() || args.bandwidth.is_some() || args.grid_size.is_some()) {
        return Err(CliError::input(
            "--kernel, --bandwidth and --grid-size only apply to the smoothed estimator",
        ));
    }
    if !parametric && args.reference.is_some() {
        return Err(CliError::input("--reference only applies to the parametric estimator"));
    }
    names
        .iter()
        .map(|name| {
            Ok(match name {
                EstimatorName::Nonsmoothed => EstimatorSpec::NonSmoothed,
                EstimatorName::Smoothed => {
                    let mut opts = SmoothingOptions::default();
                    if let Some(k) = args.kernel {
                        opts.kernel = match k {
                            KernelName::BoundaryGaussian => KernelChoice::BoundaryGaussian,
                            KernelName::Gaussian => KernelChoice::Gaussian,
                        };
                    }
                    if let Some(b) = &args.bandwidth {
                        opts.bandwidths = Bandwidths::Rule(parse_bandwidth(b)?);
                    }
                    if let Some(g) = args.grid_size {
                        if g == 0 {
                            return Err(CliError::input("--grid-size must be positive"));
                        }
                        opts.grid_size = g;
                    }
                    EstimatorSpec::Smoothed(opts)
                }
                EstimatorName::Parametric => {
                    let reference = match &args.reference {
                        Some(r) => parse_distribution(r)?,
                        None => default_reference
                            .clone()
                            .ok_or_else(|| CliError::input("the parametric estimator needs --reference"))?,
                    };
                    EstimatorSpec::Parametric { reference }
                }
            })
        })
        .collect()
}

pub fn cmd_barycenter(args: &BarycenterArgs) -> Result<String, CliError> {
    let specs = estimator_specs(&args.estimator, None)?;
    let [spec] = specs.as_slice() else {
        return Err(CliError::input("barycenter takes exactly one estimator"));
    };
    let units = parse_dataset(&read(&args.dataset)?)
        .map_err(|e| CliError::input(format!("{}: {e}", args.dataset.display())))?;
    let support = match spec {
        EstimatorSpec::Smoothed(opts) if opts.kernel == KernelChoice::BoundaryGaussian => Some((0.0, 1.0)),
        _ => None,
    };
    let data = GroupedDataset::new(units, support)?;
    let estimate = match spec {
        EstimatorSpec::NonSmoothed => nonsmoothed_barycenter(&data)?,
        EstimatorSpec::Smoothed(opts) => smoothed_barycenter(&data, opts)?,
        EstimatorSpec::Parametric { reference } => parametric_location_estimate(&data, reference)?,
    };
    let text = format_estimate(&estimate);
    let Some(out) = &args.out else {
        check_written(&text)?;
        return Ok(text);
    };
    write(out, &text)?;
    check_written(&read(out)?)?;
    Ok(String::new())
}

/// Re-reads a written estimate; a non-monotone quantile is a numerical failure.
fn check_written(text: &str) -> Result<(), CliError> {
    parse_measure(text)
        .map(drop)
        .map_err(|e| CliError::Numeric(format!("written estimate fails its check: {e}")))
}

fn parse_sizes(s: &str, n: usize) -> Result<SampleSizes, CliError> {
    let sizes = parse_counts(s, "--p")?;
    match sizes.as_slice() {
        [p] => Ok(SampleSizes::Equal(*p)),
        _ if sizes.len() == n => Ok(SampleSizes::PerUnit(sizes)),
        _ => Err(CliError::input(format!(
            "--p lists {} sizes for {n} units",
            sizes.len()
        ))),
    }
}

#[derive(Serialize)]
struct RiskExactReport {
    schema: &'static str,
    distribution: String,
    n: usize,
    #[serde(serialize_with = "as_text")]
    p: SampleSizes,
    #[serde(rename = "V")]
    v: f64,
    moments: Option<MomentMethod>,
    exact: Option<ExactRisk>,
    exact_unavailable: Option<String>,
    bounds: Vec<RiskBound>,
    skipped_bounds: Vec<(String, String)>,
}

fn as_text<S: serde::Serializer>(p: &SampleSizes, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(p)
}

pub fn cmd_risk_exact(args: &RiskExactArgs) -> Result<String, CliError> {
    let dist = parse_distribution(&args.distribution)?;
    let sizes = parse_sizes(&args.p, args.n)?;
    let mut input = RiskFormulaInput::new(args.n, sizes.clone(), args.v, dist.clone())?;
    if let Some(j) = args.expected_j2 {
        input = input.with_expected_j2(j);
    }
    let (moments, exact, exact_unavailable) = match sizes.common() {
        Some(p) => (
            Some(order_stat_moments(&dist, p)?.method()),
            Some(exact_risk_components(&input)?),
            None,
        ),
        None => (None, None, Some("the exact risk needs equal sample sizes".to_string())),
    };
    let mut cases = vec![BoundCase::GenericJ2];
    match dist {
        AnalyticDistribution::OneSidedExponential { .. } => cases.push(BoundCase::Exponential { c: None }),
        AnalyticDistribution::Gaussian { .. } => cases.push(BoundCase::Gaussian { c2: None }),
        _ => {}
    }
    cases.push(BoundCase::GeneralP);
    let mut bounds = Vec::new();
    let mut skipped_bounds = Vec::new();
    for case in &cases {
        match risk_upper_bounds(&input, case) {
            Ok(b) => bounds.push(b),
            Err(e) if e.is_numeric() => return Err(e.into()),
            Err(e) => skipped_bounds.push((case.name().to_string(), e.to_string())),
        }
    }
    let report = RiskExactReport {
        schema: RISK_EXACT_SCHEMA,
        distribution: dist.to_string(),
        n: args.n,
        p: sizes,
        v: args.v,
        moments,
        exact,
        exact_unavailable,
        bounds,
        skipped_bounds,
    };
    if args.format == OutputFormat::Json {
        let mut s = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numeric(e.to_string()))?;
        s.push('\n');
        return Ok(s);
    }
    let mut out = String::new();
    let _ = writeln!(out, "distribution {}", report.distribution);
    let _ = writeln!(out, "n {}", report.n);
    let _ = writeln!(out, "p {}", report.p);
    let _ = writeln!(out, "V {:.16e}", report.v);
    if let Some(m) = report.moments {
        let _ = writeln!(
            out,
            "moments {}",
            if m == MomentMethod::ClosedForm {
                "closed-form"
            } else {
                "quadrature"
            }
        );
    }
    match (&report.exact, &report.exact_unavailable) {
        (Some(e), _) => {
            let _ = writeln!(out, "exact_risk {:.16e}", e.total);
            let _ = writeln!(out, "between_units {:.16e}", e.between_units);
            let _ = writeln!(out, "order_stat_correction {:.16e}", e.order_stat_correction);
            let _ = writeln!(out, "empirical_to_target {:.16e}", e.empirical_to_target);
        }
        (None, Some(reason)) => {
            let _ = writeln!(out, "exact_risk unavailable ({reason})");
        }
        (None, None) => {}
    }
    for b in &report.bounds {
        let metric = match b.metric {
            wbary::theory::BoundMetric::SquaredDistance => "squared_distance",
            wbary::theory::BoundMetric::Distance => "distance",
        };
        let _ = writeln!(out, "bound {} {metric} {}", b.case, b.value);
    }
    for (case, reason) in &report.skipped_bounds {
        let _ = writeln!(out, "bound {case} not applicable ({reason})");
    }
    Ok(out)
}

#[derive(Serialize)]
struct RiskTable<'a> {
    schema: &'static str,
    model: String,
    seed: u64,
    #[serde(rename = "M")]
    replications: usize,
    reports: &'a [RiskReport],
    #[serde(skip_serializing_if = "Option::is_none")]
    log_ratio: Option<&'a [LogRatio]>,
}

/// `(n, p)` cells of a paired sweep: equal-length lists are zipped, a single value is broadcast.
fn paired_cells(ns: &[usize], ps: &[usize]) -> Result<Vec<(usize, usize)>, CliError> {
    match (ns.len(), ps.len()) {
        (a, b) if a == b => Ok(ns.iter().copied().zip(ps.iter().copied()).collect()),
        (1, _) => Ok(ps.iter().map(|&p| (ns[0], p)).collect()),
        (_, 1) => Ok(ns.iter().map(|&n| (n, ps[0])).collect()),
        _ => Err(CliError::input(
            "--n and --p lists differ in length; use --grid for a full sweep",
        )),
    }
}

fn default_reference(model: &MeasureModel) -> Option<AnalyticDistribution> {
    match model {
        MeasureModel::LocationShiftOfBase { base, .. } | MeasureModel::Deterministic { base } => Some(base.clone()),
        MeasureModel::LocationScaleGaussian { .. } => match model.population_barycenter().ok()? {
            QuantileFunction::Analytic { dist, .. } => Some(dist),
            _ => None,
        },
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String, CliError> {
    let model = parse_model(&args.model)?;
    let specs = estimator_specs(&args.estimator, default_reference(&model))?;
    let ns = parse_counts(&args.n, "--n")?;
    let ps = parse_counts(&args.p, "--p")?;
    if args.replications < 2 {
        return Err(CliError::input("--M must be at least 2"));
    }
    if args.ratio.is_some()
        && !(args.estimator.estimator.contains(&EstimatorName::Nonsmoothed)
            && args.estimator.estimator.contains(&EstimatorName::Smoothed))
    {
        return Err(CliError::input(
            "--ratio needs both the nonsmoothed and smoothed estimators",
        ));
    }
    let start = Instant::now();
    let (reports, surface) = if args.grid {
        let grid = risk_grid(&model, &specs, &ns, &ps, args.replications, args.seed)?;
        let surface = grid.log_ratio_surface("nonsmoothed", "smoothed");
        (grid.reports, surface)
    } else {
        let mut reports = Vec::new();
        for (k, (n, p)) in paired_cells(&ns, &ps)?.into_iter().enumerate() {
            let cell = CellIndex { n: k, p: k };
            reports.extend(monte_carlo_risk_multi(
                &model,
                &specs,
                n,
                &SampleSizes::Equal(p),
                args.replications,
                args.seed,
                cell,
            )?);
        }
        let surface = reports
            .iter()
            .filter(|r| r.estimator == "nonsmoothed")
            .filter_map(|a| {
                let b = reports
                    .iter()
                    .find(|b| b.estimator == "smoothed" && b.n == a.n && b.p == a.p)?;
                let p = a.p.common()?;
                Some(LogRatio {
                    n: a.n,
                    p,
                    log_ratio: (a.risk / b.risk).ln(),
                })
            })
            .collect();
        (reports, surface)
    };
    eprintln!(
        "simulated {} cells in {:.1?}",
        reports.len() / specs.len(),
        start.elapsed()
    );

    let ratio = args.ratio.as_ref().map(|_| surface.as_slice());
    let table = match args.format {
        OutputFormat::Csv => reports_to_csv(&reports),
        OutputFormat::Json => {
            let doc = RiskTable {
                schema: RISK_TABLE_SCHEMA,
                model: model.to_string(),
                seed: args.seed,
                replications: args.replications,
                reports: &reports,
                log_ratio: ratio,
            };
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numeric(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    if let Some(path) = &args.ratio {
        write(path, &log_ratio_to_csv(&surface))?;
    }
    let Some(out) = &args.out else {
        return Ok(table);
    };
    write(out, &table)?;
    let mut summary = String::new();
    for r in &reports {
        let _ = writeln!(
            summary,
            "{} n={} p={} risk={:.6e} se={:.2e}",
            r.estimator, r.n, r.p, r.risk, r.se
        );
    }
    Ok(summary)
}
