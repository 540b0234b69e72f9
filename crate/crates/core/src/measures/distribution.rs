use std::fmt;

use serde::{Deserialize, Serialize};

use super::quantile::Quantile;
use crate::error::{Error, Result};
use crate::numeric::{gl16, mills_ratio, std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// Piecewise-linear cdf given on a strictly increasing table of abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl CdfTable {
    pub fn new(xs: Vec<f64>, mut cdf: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != cdf.len() {
            return Err(Error::InvalidParameter(
                "cdf table needs at least two points and matching lengths".into(),
            ));
        }
        if xs.iter().chain(&cdf).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("cdf table contains non-finite values".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvariantViolation(
                "cdf table abscissae must increase strictly".into(),
            ));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvariantViolation(
                "cdf table values must be non-decreasing".into(),
            ));
        }
        let last = cdf.len() - 1;
        if cdf[0].abs() > 1e-12 || (cdf[last] - 1.0).abs() > 1e-12 {
            return Err(Error::InvariantViolation("cdf table must run from 0 to 1".into()));
        }
        cdf[0] = 0.0;
        cdf[last] = 1.0;
        Ok(Self { xs, cdf })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let k = self.xs.partition_point(|&v| v <= x) - 1;
        let t = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.cdf[k] + t * (self.cdf[k + 1] - self.cdf[k])
    }

    fn pdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let k = (self.xs.partition_point(|&v| v <= x).max(1) - 1).min(n - 2);
        (self.cdf[k + 1] - self.cdf[k]) / (self.xs[k + 1] - self.xs[k])
    }

    fn quantile(&self, alpha: f64) -> f64 {
        let n = self.xs.len();
        if alpha <= 0.0 {
            return self.xs[0];
        }
        if alpha >= 1.0 {
            return self.xs[n - 1];
        }
        // first segment whose upper cdf value reaches alpha; flat segments are skipped
        let k = (self.cdf.partition_point(|&c| c < alpha).max(1) - 1).min(n - 2);
        let span = self.cdf[k + 1] - self.cdf[k];
        if span <= 0.0 {
            return self.xs[k + 1];
        }
        let t = (alpha - self.cdf[k]) / span;
        self.xs[k] + t * (self.xs[k + 1] - self.xs[k])
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.xs
            .windows(2)
            .zip(self.cdf.windows(2))
            .map(|(x, c)| (c[1] - c[0], x[0], x[1]))
    }

    fn mean(&self) -> f64 {
        self.segments().map(|(w, a, b)| w * 0.5 * (a + b)).sum()
    }

    fn second_moment(&self) -> f64 {
        self.segments().map(|(w, a, b)| w * (a * a + a * b + b * b) / 3.0).sum()
    }
}

/// Reference distributions with closed-form cdf, density and quantile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticDistribution {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// Density `rate * exp(-rate * x)` on `[0, ∞)`.
    OneSidedExponential {
        rate: f64,
    },
    UserTable(CdfTable),
}

impl AnalyticDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "uniform needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn standard_uniform() -> Self {
        Self::Uniform { lo: 0.0, hi: 1.0 }
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(Error::InvalidParameter(format!("gaussian needs sd > 0, got {sd}")));
        }
        Ok(Self::Gaussian { mean, sd })
    }

    pub fn standard_gaussian() -> Self {
        Self::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "exponential needs rate > 0, got {rate}"
            )));
        }
        Ok(Self::OneSidedExponential { rate })
    }

    pub fn table(xs: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        Ok(Self::UserTable(CdfTable::new(xs, cdf)?))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Gaussian { mean, sd } => std_normal_cdf((x - mean) / sd),
            Self::OneSidedExponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::UserTable(t) => t.cdf(x),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            Self::Gaussian { mean, sd } => std_normal_pdf((x - mean) / sd) / sd,
            Self::OneSidedExponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::UserTable(t) => t.pdf(x),
        }
    }

    /// Left-continuous inverse of the cdf on (0, 1).
    pub fn quantile(&self, alpha: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => lo + (hi - lo) * alpha.clamp(0.0, 1.0),
            Self::Gaussian { mean, sd } => mean + sd * std_normal_quantile(alpha),
            Self::OneSidedExponential { rate } => {
                if alpha <= 0.0 {
                    0.0
                } else {
                    -(-alpha).ln_1p() / rate
                }
            }
            Self::UserTable(t) => t.quantile(alpha),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Gaussian { mean, .. } => *mean,
            Self::OneSidedExponential { rate } => 1.0 / rate,
            Self::UserTable(t) => t.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            Self::Gaussian { sd, .. } => sd * sd,
            Self::OneSidedExponential { rate } => 1.0 / (rate * rate),
            Self::UserTable(t) => {
                let m = t.mean();
                (t.second_moment() - m * m).max(0.0)
            }
        }
    }

    /// Closure of the support, with infinite ends where unbounded.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { lo, hi } => (*lo, *hi),
            Self::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::OneSidedExponential { .. } => (0.0, f64::INFINITY),
            Self::UserTable(t) => (t.xs[0], t.xs[t.xs.len() - 1]),
        }
    }

    /// `F(x)(1 - F(x)) / f(x)`, evaluated without tail underflow for the Gaussian.
    pub fn j2_integrand(&self, x: f64) -> Result<f64> {
        match self {
            Self::Gaussian { mean, sd } => {
                let z = ((x - mean) / sd).abs();
                Ok(sd * std_normal_cdf(z) * mills_ratio(z))
            }
            Self::OneSidedExponential { rate } => {
                if x < 0.0 {
                    Ok(0.0)
                } else {
                    Ok(-(-rate * x).exp_m1() / rate)
                }
            }
            _ => {
                let f = self.pdf(x);
                let cdf = self.cdf(x);
                let num = cdf * (1.0 - cdf);
                if num == 0.0 {
                    return Ok(0.0);
                }
                if f <= 0.0 {
                    return Err(Error::Precision(format!(
                        "density vanishes at x = {x} inside the support"
                    )));
                }
                Ok(num / f)
            }
        }
    }

    /// Exact `(∫ F⁻, ∫ (F⁻)²)` over `[lo, hi] ⊂ [0, 1]`, finite even at unbounded ends.
    pub fn quantile_moments(&self, lo: f64, hi: f64) -> (f64, f64) {
        debug_assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
        match self {
            Self::Uniform { .. } => (
                gl16(lo, hi, |a| self.quantile(a)),
                gl16(lo, hi, |a| self.quantile(a).powi(2)),
            ),
            Self::Gaussian { mean, sd } => {
                // d/dα φ(Φ⁻¹(α)) = -Φ⁻¹(α) and d/dα [Φ⁻¹(α) φ(Φ⁻¹(α))] = 1 - Φ⁻¹(α)²
                let phi_at = |a: f64| {
                    if a <= 0.0 || a >= 1.0 {
                        0.0
                    } else {
                        std_normal_pdf(std_normal_quantile(a))
                    }
                };
                let zphi_at = |a: f64| {
                    if a <= 0.0 || a >= 1.0 {
                        0.0
                    } else {
                        let z = std_normal_quantile(a);
                        z * std_normal_pdf(z)
                    }
                };
                let width = hi - lo;
                let int_z = phi_at(lo) - phi_at(hi);
                let int_z2 = width - (zphi_at(hi) - zphi_at(lo));
                (
                    mean * width + sd * int_z,
                    mean * mean * width + 2.0 * mean * sd * int_z + sd * sd * int_z2,
                )
            }
            Self::OneSidedExponential { rate } => {
                // with u = 1 - α: ∫ -ln u = u - u ln u, ∫ ln² u = u (ln² u - 2 ln u + 2)
                let g1 = |u: f64| if u <= 0.0 { 0.0 } else { u - u * u.ln() };
                let g2 = |u: f64| {
                    if u <= 0.0 {
                        0.0
                    } else {
                        let l = u.ln();
                        u * (l * l - 2.0 * l + 2.0)
                    }
                };
                let (ua, ub) = (1.0 - lo, 1.0 - hi);
                ((g1(ua) - g1(ub)) / rate, (g2(ua) - g2(ub)) / (rate * rate))
            }
            Self::UserTable(t) => {
                let mut cuts = vec![lo];
                cuts.extend(t.cdf.iter().copied().filter(|&c| c > lo && c < hi));
                cuts.push(hi);
                let mut m1 = 0.0;
                let mut m2 = 0.0;
                for w in cuts.windows(2) {
                    m1 += gl16(w[0], w[1], |a| t.quantile(a));
                    m2 += gl16(w[0], w[1], |a| t.quantile(a).powi(2));
                }
                (m1, m2)
            }
        }
    }

    /// `∫ (value - F⁻(α))² dα` over `[lo, hi]`.
    pub fn squared_deviation(&self, value: f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let touches_end = lo <= 0.0 || hi >= 1.0;
        match self {
            Self::Gaussian { .. } | Self::OneSidedExponential { .. } if touches_end => {
                // closed-form moments handle the unbounded end; centre first
                let width = hi - lo;
                let (m1, m2) = self.quantile_moments(lo, hi);
                let centre = m1 / width;
                let spread = (m2 - m1 * centre).max(0.0);
                (value - centre).powi(2) * width + spread
            }
            Self::UserTable(t) => {
                let mut cuts = vec![lo];
                cuts.extend(t.cdf.iter().copied().filter(|&c| c > lo && c < hi));
                cuts.push(hi);
                cuts.windows(2)
                    .map(|w| gl16(w[0], w[1], |a| (value - t.quantile(a)).powi(2)))
                    .sum()
            }
            _ => gl16(lo, hi, |a| (value - self.quantile(a)).powi(2)),
        }
    }

    /// Checks the generalized-inverse relation `F(F⁻(α)) >= α` on a grid of levels.
    pub fn check_inverse(&self, levels: usize) -> Result<()> {
        for i in 1..levels {
            let a = i as f64 / levels as f64;
            let back = self.cdf(self.quantile(a));
            if back < a - 1e-12 {
                return Err(Error::InvariantViolation(format!("F(F⁻({a})) = {back} < {a}")));
            }
        }
        Ok(())
    }

    pub fn short_name(&self) -> String {
        match self {
            Self::Uniform { lo, hi } => format!("uniform({lo},{hi})"),
            Self::Gaussian { mean, sd } => format!("gaussian({mean},{sd})"),
            Self::OneSidedExponential { rate } => format!("exponential({rate})"),
            Self::UserTable(t) => format!("table({} points)", t.xs.len()),
        }
    }
}

impl fmt::Display for AnalyticDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short_name())
    }
}

impl Quantile for AnalyticDistribution {
    fn quantile(&self, alpha: f64) -> f64 {
        AnalyticDistribution::quantile(self, alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{gl16_partition, graded_unit_partition};

    fn all() -> Vec<AnalyticDistribution> {
        vec![
            AnalyticDistribution::uniform(-1.0, 3.0).unwrap(),
            AnalyticDistribution::gaussian(0.5, 2.0).unwrap(),
            AnalyticDistribution::exponential(1.5).unwrap(),
            AnalyticDistribution::table(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 0.5, 0.5, 1.0]).unwrap(),
        ]
    }

    #[test]
    fn cdf_and_quantile_are_generalized_inverses() {
        for d in all() {
            d.check_inverse(997).unwrap();
        }
    }

    #[test]
    fn moments_match_quantile_integrals() {
        let part = graded_unit_partition(256, 50);
        for d in all() {
            let m1 = gl16_partition(&part, |a| d.quantile(a));
            let m2 = gl16_partition(&part, |a| d.quantile(a).powi(2));
            assert!((m1 - d.mean()).abs() < 1e-8, "{d}: {m1}");
            assert!((m2 - m1 * m1 - d.variance()).abs() < 1e-7, "{d}: {}", m2 - m1 * m1);
        }
    }

    #[test]
    fn closed_form_piece_moments_match_quadrature() {
        let part = graded_unit_partition(64, 50);
        for d in all() {
            for &(lo, hi) in &[(0.0, 0.1), (0.2, 0.45), (0.9, 1.0), (0.0, 1.0)] {
                let (m1, m2) = d.quantile_moments(lo, hi);
                let sub: Vec<f64> = part.iter().map(|a| lo + (hi - lo) * a).collect();
                let q1 = gl16_partition(&sub, |a| d.quantile(a));
                let q2 = gl16_partition(&sub, |a| d.quantile(a).powi(2));
                assert!((m1 - q1).abs() < 1e-9, "{d} [{lo},{hi}] {m1} vs {q1}");
                assert!((m2 - q2).abs() < 1e-8, "{d} [{lo},{hi}] {m2} vs {q2}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(AnalyticDistribution::uniform(1.0, 1.0).is_err());
        assert!(AnalyticDistribution::gaussian(0.0, 0.0).is_err());
        assert!(AnalyticDistribution::exponential(-1.0).is_err());
        assert!(AnalyticDistribution::table(vec![0.0, 1.0], vec![0.0, 0.9]).is_err());
        assert!(AnalyticDistribution::table(vec![1.0, 0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn j2_integrand_is_stable_in_gaussian_tail() {
        let g = AnalyticDistribution::standard_gaussian();
        let v = g.j2_integrand(200.0).unwrap();
        assert!((v * 200.0 - 1.0).abs() < 1e-4);
        assert!(g.j2_integrand(-200.0).unwrap() > 0.0);
    }
}
