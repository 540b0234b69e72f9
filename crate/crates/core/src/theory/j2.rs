use crate::error::{Error, Result};
use crate::measures::AnalyticDistribution;
use crate::numeric::adaptive_simpson;

/// Consecutive non-decaying tail increments needed to declare divergence.
const DIVERGENCE_RUNS: usize = 4;
/// A tail increment counts as non-decaying above this fraction of its predecessor.
const DECAY_RATIO: f64 = 0.9;
const MAX_DOUBLINGS: usize = 60;

/// `J₂(ν₀) = ∫ F₀(1 - F₀) / f₀ dx`, or `+∞` when the integral diverges.
///
/// Compact supports are integrated directly. Unbounded supports are truncated to
/// `median ± T` with `T` doubling; the integral is declared infinite once the tail
/// increment fails to decay over several consecutive doublings.
pub fn j2_functional(dist: &AnalyticDistribution) -> Result<f64> {
    let integrand = |x: f64| dist.j2_integrand(x);
    // surface density zeros as errors before integrating
    let checked = |x: f64| integrand(x).unwrap_or(f64::NAN);
    let (lo, hi) = dist.support();
    if lo.is_finite() && hi.is_finite() {
        let knots: Vec<f64> = match dist {
            AnalyticDistribution::UserTable(t) => t.xs().to_vec(),
            _ => vec![lo, hi],
        };
        let scale = (hi - lo).powi(2);
        let mut total = 0.0;
        for w in knots.windows(2) {
            // probe the segment so a vanishing density is reported, not integrated
            integrand(0.5 * (w[0] + w[1]))?;
            total += adaptive_simpson(&checked, w[0], w[1], 1e-13 * scale).map_err(|e| singularity(dist, e))?;
        }
        return Ok(total);
    }

    let centre = dist.quantile(0.5);
    let step = dist.variance().sqrt();
    let mut total = adaptive_simpson(&checked, (centre - step).max(lo), (centre + step).min(hi), 1e-13)
        .map_err(|e| singularity(dist, e))?;
    let mut previous = f64::NAN;
    let mut stalls = 0;
    let mut reach = step;
    for _ in 0..MAX_DOUBLINGS {
        let next = 2.0 * reach;
        let mut shell = 0.0;
        let (l0, l1) = ((centre - next).max(lo), (centre - reach).max(lo));
        if l1 > l0 {
            shell += adaptive_simpson(&checked, l0, l1, 1e-13 * next).map_err(|e| singularity(dist, e))?;
        }
        let (r0, r1) = ((centre + reach).min(hi), (centre + next).min(hi));
        if r1 > r0 {
            shell += adaptive_simpson(&checked, r0, r1, 1e-13 * next).map_err(|e| singularity(dist, e))?;
        }
        total += shell;
        if shell <= 1e-14 * total {
            return Ok(total);
        }
        if previous.is_finite() && shell >= DECAY_RATIO * previous {
            stalls += 1;
            if stalls >= DIVERGENCE_RUNS {
                return Ok(f64::INFINITY);
            }
        } else {
            stalls = 0;
        }
        previous = shell;
        reach = next;
    }
    Err(Error::Precision(format!(
        "J2 of {dist} neither converged nor diverged after {MAX_DOUBLINGS} doublings"
    )))
}

fn singularity(dist: &AnalyticDistribution, e: Error) -> Error {
    Error::Precision(format!("J2 integrand of {dist} is singular: {e}"))
}
