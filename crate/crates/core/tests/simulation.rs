use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wbary::barycenter::{parametric_location_estimate, Bandwidths, KernelChoice, SmoothingOptions};
use wbary::measures::{
    wasserstein2_squared_with, AnalyticDistribution, GridQuantile, QuadratureOptions, Quantile, QuantileFunction,
};
use wbary::numeric::midpoint_grid;
use wbary::simulation::{monte_carlo_risk, monte_carlo_risk_multi, CellIndex, EstimatorSpec, MeasureModel};
use wbary::smoothing::BandwidthRule;
use wbary::theory::{parametric_location_risk, SampleSizes};

fn uniform_risk(n: f64, p: f64, v: f64) -> f64 {
    v / n + (1.0 / (n * (p + 1.0)) + 1.0 / (p * (p + 1.0))) / 6.0
}

#[test]
fn shifted_uniform_risk_matches_closed_form() {
    let delta: f64 = 0.3;
    let model = MeasureModel::LocationShiftOfBase {
        base: AnalyticDistribution::standard_uniform(),
        b: (-delta, delta),
    };
    let r = monte_carlo_risk(
        &model,
        &EstimatorSpec::NonSmoothed,
        6,
        &SampleSizes::Equal(4),
        20_000,
        17,
    )
    .unwrap();
    let exact = uniform_risk(6.0, 4.0, delta * delta / 3.0);
    assert!((r.risk - exact).abs() < 4.0 * r.se, "{} ± {} vs {exact}", r.risk, r.se);
}

#[test]
fn parametric_risk_matches_closed_form() {
    let (sigma, gamma2): (f64, f64) = (1.5, 0.75);
    // b ~ U(-c, c) has variance c²/3
    let c = (3.0 * gamma2).sqrt();
    let base = AnalyticDistribution::gaussian(0.0, sigma).unwrap();
    let model = MeasureModel::LocationShiftOfBase {
        base: base.clone(),
        b: (-c, c),
    };
    let spec = EstimatorSpec::Parametric { reference: base };
    let r = monte_carlo_risk(&model, &spec, 8, &SampleSizes::Equal(6), 20_000, 3).unwrap();
    let exact = parametric_location_risk(sigma * sigma, gamma2, &[6; 8]);
    assert!((r.risk - exact).abs() < 4.0 * r.se, "{} ± {} vs {exact}", r.risk, r.se);
}

#[test]
fn parametric_estimate_of_a_known_dataset() {
    let data = wbary::barycenter::GroupedDataset::new(vec![vec![1.0, 3.0], vec![5.0]], None).unwrap();
    let est = parametric_location_estimate(&data, &AnalyticDistribution::standard_gaussian()).unwrap();
    // unit means 2 and 5
    assert_eq!(
        est.quantile,
        QuantileFunction::Analytic {
            dist: AnalyticDistribution::standard_gaussian(),
            shift: 3.5
        }
    );
}

#[test]
fn unit_means_follow_the_shift_law() {
    let data = MeasureModel::figure_study().draw_dataset(&[100; 100], 9).unwrap();
    let mut means: Vec<f64> = data
        .units()
        .iter()
        .map(|u| u.iter().sum::<f64>() / u.len() as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    // sample mean of unit k is b_k + O(0.1); compare with U(-2, 2) quantiles
    for (k, m) in means.iter().enumerate() {
        let target = -2.0 + 4.0 * (k as f64 + 0.5) / 100.0;
        assert!((m - target).abs() < 0.6, "rank {k}: {m} vs {target}");
    }
    assert!(means[0] > -2.5 && means[99] < 2.5);
}

#[test]
fn standard_error_halves_when_replications_quadruple() {
    let model = MeasureModel::figure_study();
    let a = monte_carlo_risk(&model, &EstimatorSpec::NonSmoothed, 10, &SampleSizes::Equal(10), 500, 5).unwrap();
    let b = monte_carlo_risk(
        &model,
        &EstimatorSpec::NonSmoothed,
        10,
        &SampleSizes::Equal(10),
        2000,
        5,
    )
    .unwrap();
    let ratio = a.se / b.se;
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn risk_is_stable_when_the_grid_doubles() {
    let model = MeasureModel::figure_study();
    let spec = |grid_size| {
        EstimatorSpec::Smoothed(SmoothingOptions {
            kernel: KernelChoice::Gaussian,
            bandwidths: Bandwidths::Rule(BandwidthRule::default()),
            grid_size,
        })
    };
    let specs = [spec(4096), spec(8192)];
    let r = monte_carlo_risk_multi(&model, &specs, 20, &SampleSizes::Equal(20), 10, 8, CellIndex::default()).unwrap();
    let rel = (r[0].risk - r[1].risk).abs() / r[1].risk;
    assert!(rel < 0.01, "{} vs {}", r[0].risk, r[1].risk);
}

/// `d_W²(ν⊕_n, ν₀)` with the exact unit measures in place of samples.
fn barycenter_of_truth_distance(model: &MeasureModel, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas = midpoint_grid(2048);
    let mut sum = vec![0.0; alphas.len()];
    let (mut a_bar, mut b_bar) = (0.0, 0.0);
    for _ in 0..n {
        let unit = model.draw_unit(&mut rng);
        a_bar += unit.scale / n as f64;
        b_bar += unit.shift / n as f64;
        let q = model.unit_quantile(unit).unwrap();
        for (s, &a) in sum.iter_mut().zip(&alphas) {
            *s += q.quantile(a) / n as f64;
        }
    }
    let bary = QuantileFunction::Grid(GridQuantile::new(alphas, sum).unwrap());
    let truth = model.population_barycenter().unwrap();
    let d = wasserstein2_squared_with(&bary, &truth, &QuadratureOptions { grid_size: 2048 })
        .unwrap()
        .value;
    // for N(0, 1) units the barycenter is N(b̄, ā²)
    (d, (a_bar - 1.0).powi(2) + b_bar * b_bar)
}

#[test]
fn barycenter_of_the_true_measures_is_consistent() {
    let model = MeasureModel::LocationScaleGaussian {
        mean: 0.0,
        sd: 1.0,
        a: (0.8, 1.2),
        b: (-2.0, 2.0),
        truncation: None,
    };
    let median = |n: usize| {
        let mut d: Vec<f64> = (0..20)
            .map(|s| {
                let (d, oracle) = barycenter_of_truth_distance(&model, n, s);
                assert!((d - oracle).abs() < 1e-3 * (1.0 + oracle), "{d} vs {oracle}");
                d
            })
            .collect();
        d.sort_by(f64::total_cmp);
        0.5 * (d[9] + d[10])
    };
    let (m10, m160) = (median(10), median(160));
    assert!(m160 < m10, "{m160} vs {m10}");
}
