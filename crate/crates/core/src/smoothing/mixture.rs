use super::kernel::{invert_cdf, BaseKernel, BoundaryKernelMeasure};
use crate::error::{Error, Result};
use crate::numeric::{std_normal_cdf, std_normal_pdf};

/// Tail reach of the plain Gaussian mixture, in bandwidths beyond the extreme samples.
const GAUSSIAN_REACH: f64 = 40.0;
const MIN_TABLE: usize = 256;
const MAX_TABLE: usize = 8192;

/// Which kernel a smoothed empirical measure uses.
#[derive(Debug, Clone)]
pub enum SmoothingKernel {
    /// Boundary-corrected kernel on [0, 1].
    Boundary(BaseKernel),
    /// Plain Gaussian kernel on the real line.
    Gaussian,
}

/// `μ̃_i = (1/p) Σ_j μ_h^{X_j}`, the kernel-smoothed empirical measure of one unit.
#[derive(Debug, Clone)]
pub struct SmoothedMeasure {
    samples: Vec<f64>,
    bandwidth: f64,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Boundary(Vec<BoundaryKernelMeasure>),
    Gaussian,
}

impl SmoothedMeasure {
    pub fn new(samples: &[f64], bandwidth: f64, kernel: SmoothingKernel) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("cannot smooth an empty sample".into()));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let mut samples = samples.to_vec();
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("samples must be finite".into()));
        }
        samples.sort_by(f64::total_cmp);
        let kind = match kernel {
            SmoothingKernel::Boundary(base) => Kind::Boundary(
                samples
                    .iter()
                    .map(|&y| BoundaryKernelMeasure::new(y, bandwidth, base.clone()))
                    .collect::<Result<_>>()?,
            ),
            SmoothingKernel::Gaussian => Kind::Gaussian,
        };
        Ok(Self {
            samples,
            bandwidth,
            kind,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn bracket(&self) -> (f64, f64) {
        match self.kind {
            Kind::Boundary(_) => (0.0, 1.0),
            Kind::Gaussian => {
                let reach = GAUSSIAN_REACH * self.bandwidth;
                (self.samples[0] - reach, self.samples[self.samples.len() - 1] + reach)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_pdf(x).0
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.cdf_pdf(x).1
    }

    /// Mixture cdf and density at `x` in one pass.
    pub fn cdf_pdf(&self, x: f64) -> (f64, f64) {
        let p = self.samples.len() as f64;
        match &self.kind {
            Kind::Boundary(parts) => {
                let (mut c, mut d) = (0.0, 0.0);
                for k in parts {
                    c += k.cdf_clamped(x);
                    d += k.pdf(x);
                }
                ((c / p).clamp(0.0, 1.0), d / p)
            }
            Kind::Gaussian => {
                let h = self.bandwidth;
                let (mut c, mut d) = (0.0, 0.0);
                // samples far to the left contribute exactly 1, far to the right 0
                let lo = self.samples.partition_point(|&s| s < x - 9.0 * h);
                let hi = self.samples.partition_point(|&s| s <= x + 9.0 * h);
                for &s in &self.samples[lo..hi] {
                    let z = (x - s) / h;
                    c += std_normal_cdf(z);
                    d += std_normal_pdf(z);
                }
                c += lo as f64;
                ((c / p).clamp(0.0, 1.0), d / (p * h))
            }
        }
    }

    /// Quantile by bracketed Newton iteration on the mixture cdf.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("quantile level {alpha} lies outside (0, 1)")));
        }
        let (lo, hi) = self.bracket();
        Ok(invert_cdf(|x| self.cdf(x), |x| self.pdf(x), alpha, lo, hi))
    }

    /// Mixture cdf with the left and right derivatives at `x`; they differ only at
    /// sample points of the boundary-corrected kernel.
    fn cdf_sided(&self, x: f64) -> (f64, f64, f64) {
        let (c, d) = self.cdf_pdf(x);
        let Kind::Boundary(parts) = &self.kind else {
            return (c, d, d);
        };
        let p = self.samples.len() as f64;
        let (mut left, mut right) = (d, d);
        let lo = self.samples.partition_point(|&s| s < x);
        let hi = self.samples.partition_point(|&s| s <= x);
        for k in &parts[lo..hi] {
            let (b1, b2) = k.boundary_masses();
            let base = std_kernel_peak(k) / p;
            left += 2.0 * b1 * base;
            right += 2.0 * b2 * base;
        }
        (c, left, right)
    }

    /// Quantiles at many levels through a tabulated cdf.
    ///
    /// The cdf is tabulated on an x-grid with spacing at most `h/8`, plus every sample
    /// point; each level is inverted on the cubic Hermite interpolant of its cell.
    /// Levels outside the tabulated range fall back to [`Self::quantile`].
    pub fn quantiles(&self, alphas: &[f64]) -> Result<Vec<f64>> {
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Domain(format!("quantile level {a} lies outside (0, 1)")));
        }
        let (lo, hi) = match self.kind {
            Kind::Boundary(_) => (0.0, 1.0),
            Kind::Gaussian => {
                let reach = 8.0 * self.bandwidth;
                (self.samples[0] - reach, self.samples[self.samples.len() - 1] + reach)
            }
        };
        let wanted = ((hi - lo) / (0.125 * self.bandwidth)).ceil() as usize;
        let size = wanted.clamp(MIN_TABLE, MAX_TABLE);
        let step = (hi - lo) / (size - 1) as f64;
        let mut xs: Vec<f64> = (0..size)
            .map(|i| if i + 1 == size { hi } else { lo + i as f64 * step })
            .collect();
        if let Kind::Boundary(_) = self.kind {
            xs.extend_from_slice(&self.samples);
            xs.sort_by(f64::total_cmp);
            xs.dedup();
        }
        let table: Vec<(f64, f64, f64)> = xs.iter().map(|&x| self.cdf_sided(x)).collect();
        let last = xs.len() - 1;

        let mut order: Vec<usize> = (0..alphas.len()).collect();
        order.sort_by(|&a, &b| alphas[a].total_cmp(&alphas[b]));
        let mut out = vec![0.0; alphas.len()];
        let mut k = 0;
        let mut previous = f64::NEG_INFINITY;
        for idx in order {
            let a = alphas[idx];
            let x = if a <= table[0].0 || a >= table[last].0 {
                self.quantile(a)?
            } else {
                while table[k + 1].0 < a {
                    k += 1;
                }
                let (f0, _, d0) = table[k];
                let (f1, d1, _) = table[k + 1];
                invert_hermite(xs[k], xs[k + 1], f0, f1, d0, d1, a)
            };
            // a Hermite cubic need not be monotone; keep the output non-decreasing
            previous = previous.max(x);
            out[idx] = previous;
        }
        Ok(out)
    }
}

/// `ψ_h(0)` of a component, the density factor multiplying the jump at its centre.
fn std_kernel_peak(k: &BoundaryKernelMeasure) -> f64 {
    let (b1, b2) = k.boundary_masses();
    k.pdf(k.centre()) - 4.0 * b1 * b2
}

/// Solves `H(t) = a` on the cubic Hermite interpolant of one table cell.
fn invert_hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, a: f64) -> f64 {
    let dx = x1 - x0;
    let (m0, m1) = (d0 * dx, d1 * dx);
    let h = |t: f64| {
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * m1
    };
    let dh = |t: f64| {
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) * f0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * f1
            + (3.0 * t2 - 2.0 * t) * m1
    };
    if f1 <= f0 {
        return x0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut t = ((a - f0) / (f1 - f0)).clamp(0.0, 1.0);
    for _ in 0..60 {
        let r = h(t) - a;
        if r == 0.0 {
            break;
        }
        if r < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let s = dh(t);
        let next = t - r / s;
        let next = if s > 0.0 && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() < 1e-15 {
            t = next;
            break;
        }
        t = next;
    }
    x0 + t * dx
}
