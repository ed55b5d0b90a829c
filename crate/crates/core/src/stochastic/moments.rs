use std::cell::Cell;

use crate::error::{Error, Result};
use crate::kernel::{breakpoints, support, Coefficients};
use crate::quadrature::{integrate, QuadratureSpec};

/// Sample moments of a set of replicate values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl SampleMoments {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let count = values.len();
        if count < 2 {
            return Err(Error::EmptySample);
        }
        let n = count as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        Ok(Self {
            count,
            mean,
            variance: m2 * n / (n - 1.0),
            skewness: m3 / m2.powf(1.5),
            excess_kurtosis: m4 / (m2 * m2) - 3.0,
        })
    }

    /// Standard error of the variance estimator for a Gaussian sample.
    pub fn variance_se(&self) -> f64 {
        self.variance * (2.0 / (self.count as f64 - 1.0)).sqrt()
    }

    /// `|γ₁| < k√(6/N)` and `|γ₂| < k√(24/N)`.
    pub fn looks_gaussian(&self, sigmas: f64) -> bool {
        let n = self.count as f64;
        self.skewness.abs() < sigmas * (6.0 / n).sqrt()
            && self.excess_kurtosis.abs() < sigmas * (24.0 / n).sqrt()
    }
}

/// `∫₀ᵗ ∫ G(s, x, y)² dy ds`.
pub fn variance_quadrature(t: f64, x: f64, c: &Coefficients, quad: &QuadratureSpec) -> Result<f64> {
    covariance_quadrature(t, x, x, c, quad)
}

/// `∫₀ᵗ ∫ G(s, x1, y) G(s, x2, y) dy ds`.
///
/// With `s = r²` the `s^{-1/2}` behaviour of the inner integral becomes a
/// bounded integrand `2r I(r²)` on `[0, √t]`.
pub fn covariance_quadrature(
    t: f64,
    x1: f64,
    x2: f64,
    c: &Coefficients,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositiveTime(t));
    }
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(Error::Precondition(
            "evaluation points must be finite".into(),
        ));
    }
    let base_tol = 0.1 * quad.abs_tol / t.max(1.0);
    let inv_width = 1.0 / c.min_diffusivity().sqrt();
    let failure: Cell<Option<Error>> = Cell::new(None);
    let outer = integrate(
        |r| {
            let s = r * r;
            if s <= 0.0 {
                return 0.0;
            }
            // I(s) grows like s^{-1/2}, and once the kernel width r is tiny
            // next to |x| the abscissae themselves carry relative error
            // ε|x|/r; only a relative tolerance is attainable there.
            let scale = inv_width / r;
            let rel = 1e-12 + 16.0 * f64::EPSILON * (x1.abs() + x2.abs()) * scale;
            let spec = quad.with_tol(base_tol.max(rel * scale));
            match inner(s, x1, x2, c, &spec) {
                Ok(v) => 2.0 * r * v,
                Err(e) => {
                    let prev = failure.take();
                    failure.set(prev.or(Some(e)));
                    0.0
                }
            }
        },
        &[0.0, t.sqrt()],
        quad,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(outer?.value)
}

fn inner(s: f64, x1: f64, x2: f64, c: &Coefficients, spec: &QuadratureSpec) -> Result<f64> {
    let (lo1, hi1) = support(c, s, x1, spec.truncation_exponent);
    let (lo2, hi2) = support(c, s, x2, spec.truncation_exponent);
    let (lo, hi) = (lo1.max(lo2), hi1.min(hi2));
    if lo >= hi {
        return Ok(0.0);
    }
    let pts = breakpoints(lo, hi, &[x1, x2]);
    Ok(integrate(|y| c.g(s, x1, y) * c.g(s, x2, y), &pts, spec)?.value)
}
