use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, std_normal_cdf, std_normal_pdf};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied symmetric density with its cdf, rescaled to unit second moment.
#[derive(Clone)]
pub struct UserKernel {
    density: ScalarFn,
    cdf: ScalarFn,
    /// `ψ(x) = s ψ_raw(s x)` with `s` the raw standard deviation.
    scale: f64,
    tail: Option<(f64, f64)>,
}

impl fmt::Debug for UserKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserKernel")
            .field("scale", &self.scale)
            .field("tail", &self.tail)
            .finish_non_exhaustive()
    }
}

impl UserKernel {
    /// Validates symmetry and positivity, rescales to `∫ x² ψ = 1`, and checks the
    /// declared tail condition `ψ(x) <= C x^{-α}` (with `α >= 5`) when one is given.
    pub fn new<D, C>(density: D, cdf: C, tail: Option<(f64, f64)>) -> Result<Self>
    where
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for i in 0..=200 {
            let x = i as f64 * 0.05;
            let (l, r) = (density(-x), density(x));
            if !(l >= 0.0 && r >= 0.0) || (l - r).abs() > 1e-12 * l.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "kernel density is not symmetric and non-negative at x = {x}"
                )));
            }
        }
        if (cdf(0.0) - 0.5).abs() > 1e-9 {
            return Err(Error::InvalidParameter("kernel cdf must equal 1/2 at 0".into()));
        }
        let second = second_moment(&density)?;
        if !(second > 0.0 && second.is_finite()) {
            return Err(Error::InvalidParameter(
                "kernel second moment must be finite and positive".into(),
            ));
        }
        let kernel = Self {
            density: Arc::new(density),
            cdf: Arc::new(cdf),
            scale: second.sqrt(),
            tail,
        };
        if let Some((c, alpha)) = tail {
            if alpha < 5.0 {
                return Err(Error::InvalidParameter(format!("tail exponent {alpha} is below 5")));
            }
            for k in 0..40 {
                let x = 10.0 * 1.25f64.powi(k);
                if kernel.pdf(x) > c * x.powf(-alpha) * (1.0 + 1e-12) {
                    return Err(Error::InvalidParameter(format!(
                        "kernel violates the declared tail bound at x = {x}"
                    )));
                }
            }
        }
        Ok(kernel)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.scale * (self.density)(self.scale * x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(self.scale * x)
    }

    /// The factor the raw density was rescaled by.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

fn second_moment(density: &dyn Fn(f64) -> f64) -> Result<f64> {
    let f = |x: f64| x * x * density(x);
    let mut total = 2.0 * adaptive_simpson(&f, 0.0, 1.0, 1e-12)?;
    let mut reach = 1.0;
    for _ in 0..40 {
        let shell = 2.0 * adaptive_simpson(&f, reach, 2.0 * reach, 1e-12)?;
        total += shell;
        reach *= 2.0;
        if shell <= 1e-13 * total {
            return Ok(total);
        }
    }
    Err(Error::InvalidParameter("kernel second moment does not converge".into()))
}

/// The smoothing density `ψ`: positive, symmetric, unit second moment.
#[derive(Debug, Clone, Default)]
pub enum BaseKernel {
    #[default]
    Gaussian,
    User(UserKernel),
}

impl BaseKernel {
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian => std_normal_pdf(x),
            Self::User(k) => k.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian => std_normal_cdf(x),
            Self::User(k) => k.cdf(x),
        }
    }
}

/// The boundary-corrected kernel measure `μ_h^y` on [0, 1].
///
/// Its density is `ψ_h(x-y) (1 + 2 b₂ 1{x>y} + 2 b₁ 1{x<y}) + 4 b₁ b₂` with
/// `b₁ = 1 - Ψ((1-y)/h)` and `b₂ = Ψ(-y/h)`, i.e. the mass of `ψ_h(· - y)` lying
/// beyond each end of the interval.
#[derive(Debug, Clone)]
pub struct BoundaryKernelMeasure {
    centre: f64,
    bandwidth: f64,
    b1: f64,
    b2: f64,
    kernel: BaseKernel,
}

impl BoundaryKernelMeasure {
    pub fn new(centre: f64, bandwidth: f64, kernel: BaseKernel) -> Result<Self> {
        if !(0.0..=1.0).contains(&centre) {
            return Err(Error::Domain(format!("kernel centre {centre} lies outside [0, 1]")));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let b1 = 1.0 - kernel.cdf((1.0 - centre) / bandwidth);
        let b2 = kernel.cdf(-centre / bandwidth);
        Ok(Self {
            centre,
            bandwidth,
            b1,
            b2,
            kernel,
        })
    }

    pub fn gaussian(centre: f64, bandwidth: f64) -> Result<Self> {
        Self::new(centre, bandwidth, BaseKernel::Gaussian)
    }

    pub fn centre(&self) -> f64 {
        self.centre
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `(b₁, b₂)`, the kernel mass beyond 1 and below 0 respectively.
    pub fn boundary_masses(&self) -> (f64, f64) {
        (self.b1, self.b2)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let u = x - self.centre;
        let base = self.kernel.pdf(u / self.bandwidth) / self.bandwidth;
        let weight = if u > 0.0 {
            1.0 + 2.0 * self.b2
        } else if u < 0.0 {
            1.0 + 2.0 * self.b1
        } else {
            1.0
        };
        base * weight + 4.0 * self.b1 * self.b2
    }

    /// Closed-form `∫₀ˣ f(t) dt`; errors outside [0, 1].
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("cdf argument {x} lies outside [0, 1]")));
        }
        Ok(self.cdf_clamped(x))
    }

    pub(crate) fn cdf_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let (y, h, b1, b2) = (self.centre, self.bandwidth, self.b1, self.b2);
        let uniform = 4.0 * b1 * b2;
        let value = if x <= y {
            (1.0 + 2.0 * b1) * (self.kernel.cdf((x - y) / h) - b2) + uniform * x
        } else {
            (1.0 + 2.0 * b1) * (0.5 - b2)
                + uniform * y
                + (1.0 + 2.0 * b2) * (self.kernel.cdf((x - y) / h) - 0.5)
                + uniform * (x - y)
        };
        value.clamp(0.0, 1.0)
    }

    /// The unique `x` with `cdf(x) = alpha`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("quantile level {alpha} lies outside (0, 1)")));
        }
        Ok(invert_cdf(|x| self.cdf_clamped(x), |x| self.pdf(x), alpha, 0.0, 1.0))
    }
}

/// Bracketed Newton iteration for `cdf(x) = alpha` on `[lo, hi]`, falling back to
/// bisection whenever a Newton step leaves the bracket.
pub(crate) fn invert_cdf<C, D>(cdf: C, pdf: D, alpha: f64, mut lo: f64, mut hi: f64) -> f64
where
    C: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = cdf(x) - alpha;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = pdf(x);
        let newton = x - f / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}
