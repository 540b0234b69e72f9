//! Small numerical toolbox shared by the estimators: reproducible summation,
//! standard normal functions, Gauss–Legendre panels and root bracketing.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::OnceLock;

use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Pairwise (cascade) summation in a fixed order.
///
/// The result depends only on the order of `values`, which makes reductions over
/// parallel replications bit-reproducible once they are collected in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal cdf on (0, 1); ±∞ at the endpoints.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        // 1 - p is exact here
        return -std_normal_quantile(1.0 - p);
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // one Halley step against the erfc-based cdf
    let e = std_normal_cdf(x) - p;
    let u = e / std_normal_pdf(x);
    if u.is_finite() {
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

/// Mills ratio `Φ(-x) / φ(x)` for `x >= 0`, stable far into the tail.
pub fn mills_ratio(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 8.0 {
        return std_normal_cdf(-x) / std_normal_pdf(x);
    }
    // Laplace continued fraction, evaluated backwards.
    let mut tail = 0.0;
    for k in (1..=80).rev() {
        tail = k as f64 / (x + tail);
    }
    1.0 / (x + tail)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// The 16-point Gauss–Legendre rule, computed once.
pub fn gauss_legendre_16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Integrates `f` over `[lo, hi]` with one 16-point Gauss–Legendre panel.
pub fn gl16<F: FnMut(f64) -> f64>(lo: f64, hi: f64, mut f: F) -> f64 {
    let (nodes, weights) = gauss_legendre_16();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Partition of (0, 1) into `uniform` equal panels whose first and last panels are
/// further split geometrically towards the endpoints (`levels` halvings each).
///
/// Suited to integrands with integrable logarithmic singularities at 0 and 1, such as
/// powers of an unbounded quantile function. Refinement stops at `2^-40` from either
/// end so that every node stays representable and distinct from 1.
pub fn graded_unit_partition(uniform: usize, levels: usize) -> Vec<f64> {
    let uniform = uniform.max(2);
    let width = 1.0 / uniform as f64;
    let levels = (0..=levels)
        .take_while(|&k| width * 0.5f64.powi(k as i32) >= 2f64.powi(-40))
        .last()
        .unwrap_or(0);
    let mut points = Vec::with_capacity(uniform + 2 * levels + 1);
    points.push(0.0);
    for k in (1..=levels).rev() {
        points.push(width * 0.5f64.powi(k as i32));
    }
    for i in 1..uniform {
        points.push(i as f64 * width);
    }
    for k in 1..=levels {
        points.push(1.0 - width * 0.5f64.powi(k as i32));
    }
    points.push(1.0);
    points
}

/// Integrates `f` over a partition with one 16-point Gauss–Legendre panel per cell.
pub fn gl16_partition<F: FnMut(f64) -> f64>(partition: &[f64], mut f: F) -> f64 {
    let parts: Vec<f64> = partition.windows(2).map(|w| gl16(w[0], w[1], &mut f)).collect();
    pairwise_sum(&parts)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if !delta.is_finite() {
            return Err(Error::Precision(format!("non-finite integrand on [{a}, {b}]")));
        }
        if depth == 0 {
            return Err(Error::Precision(format!(
                "adaptive quadrature did not converge on [{a}, {b}]"
            )));
        }
        // the last clause stops refining on rounding noise, e.g. branch switches in erfc
        if delta.abs() <= 15.0 * tol
            || (b - a) < 1e-15 * (1.0 + a.abs())
            || delta.abs() <= 64.0 * f64::EPSILON * (left.abs() + right.abs())
        {
            return Ok(left + right + delta / 15.0);
        }
        Ok(step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    if hi <= lo {
        return Ok(0.0);
    }
    // Seed with a few panels so narrow features are not missed by the first estimate.
    let panels = 8;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = lo + k as f64 * width;
        let b = if k + 1 == panels { hi } else { a + width };
        let (fa, fb) = (f(a), f(b));
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += step(f, a, b, fa, fm, fb, whole, tol / panels as f64, 48)?;
    }
    Ok(total)
}

/// Bisection for the root of a non-decreasing function `f - target` on `[lo, hi]`.
///
/// Assumes `f(lo) <= target <= f(hi)`; returns the bracket midpoint once its
/// width falls below `tol`.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `count` midpoints of the uniform partition of (0, 1).
pub fn midpoint_grid(count: usize) -> Vec<f64> {
    let width = 1.0 / count as f64;
    (0..count).map(|i| (i as f64 + 0.5) * width).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // degree 31 is the limit of the 16-point rule
        let value = gl16(0.0, 1.0, |x| x.powi(31));
        assert!((value - 1.0 / 32.0).abs() < 1e-15);
        let (_, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
            let x = std_normal_quantile(p);
            let back = std_normal_cdf(x);
            assert!((back - p).abs() <= 1e-13 * p.max(1e-3), "p={p} back={back}");
        }
        assert_eq!(std_normal_quantile(0.5), 0.0);
    }

    #[test]
    fn mills_ratio_is_continuous_at_switch() {
        let below = std_normal_cdf(-7.999_999) / std_normal_pdf(7.999_999);
        let above = mills_ratio(8.0);
        assert!((below - above).abs() / above < 1e-6);
        // asymptotics: R(x) ~ 1/x
        assert!((mills_ratio(1e4) * 1e4 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn adaptive_simpson_handles_narrow_peaks() {
        let h = 1e-3;
        let f = |x: f64| std_normal_pdf((x - 0.37) / h) / h;
        let v = adaptive_simpson(&f, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn graded_partition_handles_log_singularity() {
        // ∫ Φ⁻¹(α)² dα = 1
        let part = graded_unit_partition(64, 40);
        let v = gl16_partition(&part, |a| std_normal_quantile(a).powi(2));
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 4950.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
