//! Closed-form fundamental solution of `∂u/∂t = L u` with
//! `L = (1 / 2ρ) d/dx (ρ A d/dx)`, where `A = a1, ρ = rho1` on `x <= 0` and
//! `A = a2, ρ = rho2` on `x > 0`.
//!
//! With `f(y) = y / sqrt(A(y))`,
//!
//! ```text
//! G(t, x, y) = (2πt)^{-1/2} A(y)^{-1/2}
//!              * [ exp(-(f(x) - f(y))² / 2t) + β sign(y) exp(-(|f(x)| + |f(y)|)² / 2t) ]
//! ```
//!
//! `sign(0)` is taken as `-1` so that `y = 0` belongs to the left piece, as
//! `A(0) = a1` does. `G` is a density in `y`, continuous in `x`, and its
//! `x`-derivative jumps at the interface so that the flux `ρ A ∂ₓG` matches.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureSpec};

/// The four positive constants of the operator and the derived α, β.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientValues", into = "CoefficientValues")]
pub struct Coefficients {
    a1: f64,
    a2: f64,
    rho1: f64,
    rho2: f64,
    sqrt_a1: f64,
    sqrt_a2: f64,
    alpha: f64,
    beta: f64,
}

/// Plain form of [`Coefficients`] used for (de)serialization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientValues {
    pub a1: f64,
    pub a2: f64,
    pub rho1: f64,
    pub rho2: f64,
}

impl TryFrom<CoefficientValues> for Coefficients {
    type Error = Error;

    fn try_from(v: CoefficientValues) -> Result<Self> {
        Coefficients::new(v.a1, v.a2, v.rho1, v.rho2)
    }
}

impl From<Coefficients> for CoefficientValues {
    fn from(c: Coefficients) -> Self {
        CoefficientValues {
            a1: c.a1,
            a2: c.a2,
            rho1: c.rho1,
            rho2: c.rho2,
        }
    }
}

impl Coefficients {
    pub fn new(a1: f64, a2: f64, rho1: f64, rho2: f64) -> Result<Self> {
        for (name, value) in [("a1", a1), ("a2", a2), ("rho1", rho1), ("rho2", rho2)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveCoefficient { name, value });
            }
        }
        let sqrt_a1 = a1.sqrt();
        let sqrt_a2 = a2.sqrt();
        let alpha = 1.0 - (rho1 * a1) / (rho2 * a2);
        let denom = sqrt_a1 - sqrt_a2 * (alpha - 1.0);
        if !(denom > 0.0) {
            return Err(Error::DegenerateBeta(denom));
        }
        let beta = (sqrt_a1 + sqrt_a2 * (alpha - 1.0)) / denom;
        Ok(Self {
            a1,
            a2,
            rho1,
            rho2,
            sqrt_a1,
            sqrt_a2,
            alpha,
            beta,
        })
    }

    /// Same diffusivity and density on both sides.
    pub fn homogeneous(a: f64, rho: f64) -> Result<Self> {
        Self::new(a, a, rho, rho)
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn rho1(&self) -> f64 {
        self.rho1
    }
    pub fn rho2(&self) -> f64 {
        self.rho2
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `A(x)`.
    #[inline]
    pub fn diffusivity(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.a1
        } else {
            self.a2
        }
    }

    /// `ρ(x)`.
    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.rho1
        } else {
            self.rho2
        }
    }

    #[inline]
    fn sqrt_diffusivity(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.sqrt_a1
        } else {
            self.sqrt_a2
        }
    }

    /// `ρ2 a2 - ρ1 a1`, the weight of the interface term in the weak form.
    pub fn flux_jump_weight(&self) -> f64 {
        self.rho2 * self.a2 - self.rho1 * self.a1
    }

    pub fn max_diffusivity(&self) -> f64 {
        self.a1.max(self.a2)
    }

    pub fn min_diffusivity(&self) -> f64 {
        self.a1.min(self.a2)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.a1 == self.a2 && self.rho1 == self.rho2
    }

    /// `f(y) = y / sqrt(A(y))`.
    #[inline]
    pub fn f(&self, y: f64) -> f64 {
        y / self.sqrt_diffusivity(y)
    }

    /// Inverse of [`Coefficients::f`].
    #[inline]
    pub fn f_inverse(&self, v: f64) -> f64 {
        if v <= 0.0 {
            v * self.sqrt_a1
        } else {
            v * self.sqrt_a2
        }
    }

    /// `G(t, x, y)` for `t > 0`; no argument checks.
    #[inline]
    pub(crate) fn g(&self, t: f64, x: f64, y: f64) -> f64 {
        let two_t = 2.0 * t;
        let (e1, e2) = self.exponents(x, y, two_t);
        let sign_y = if y > 0.0 { 1.0 } else { -1.0 };
        let pref = 1.0 / ((2.0 * PI * t).sqrt() * self.sqrt_diffusivity(y));
        pref * ((-e1).exp() + self.beta * sign_y * (-e2).exp())
    }

    /// The two Gaussian exponents of `G`. On a common side they are written
    /// in `x - y` and `|x| + |y|` directly, which avoids cancellation in
    /// `f(x) - f(y)`; across the interface they coincide.
    #[inline]
    fn exponents(&self, x: f64, y: f64, two_t: f64) -> (f64, f64) {
        let x_left = x <= 0.0;
        if x_left == (y <= 0.0) {
            let a = if x_left { self.a1 } else { self.a2 };
            let d = x - y;
            let s = x.abs() + y.abs();
            (d * d / (a * two_t), s * s / (a * two_t))
        } else if self.a1 == self.a2 {
            // same exponent as the plain Gaussian, bit for bit
            let s = x.abs() + y.abs();
            let e = s * s / (self.a1 * two_t);
            (e, e)
        } else {
            let s = x.abs() / self.sqrt_diffusivity(x) + y.abs() / self.sqrt_diffusivity(y);
            let e = s * s / two_t;
            (e, e)
        }
    }

    /// `∂G/∂x` evaluated on the branch `right` (x > 0 formula) or left
    /// (x <= 0 formula); at `x = 0` this is the one-sided limit.
    #[inline]
    pub(crate) fn dgdx_branch(&self, t: f64, x: f64, y: f64, right: bool) -> f64 {
        let (a_x, sqrt_a_x, sigma) = if right {
            (self.a2, self.sqrt_a2, 1.0)
        } else {
            (self.a1, self.sqrt_a1, -1.0)
        };
        let y_right = y > 0.0;
        let sign_y = if y_right { 1.0 } else { -1.0 };
        let pref = 1.0 / ((2.0 * PI * t).sqrt() * self.sqrt_diffusivity(y));
        let two_t = 2.0 * t;
        if right == y_right {
            let d = x - y;
            let s = sigma * x + y.abs();
            let e1 = (-(d * d) / (a_x * two_t)).exp();
            let e2 = (-(s * s) / (a_x * two_t)).exp();
            pref * (-(d / (a_x * t)) * e1 - self.beta * sign_y * sigma * (s / (a_x * t)) * e2)
        } else {
            let fx = x / sqrt_a_x;
            let fy = y / self.sqrt_diffusivity(y);
            let d = fx - fy;
            let s = sigma * fx + fy.abs();
            let e = (-(s * s) / two_t).exp();
            pref * e * (-(d / (sqrt_a_x * t)) - self.beta * sign_y * sigma * (s / (sqrt_a_x * t)))
        }
    }
}

/// Side of the interface for one-sided limits at `x = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x → 0⁻`
    Left,
    /// `x → 0⁺`
    Right,
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(format!("side must be 'left' or 'right', got '{other}'")),
        }
    }
}

pub fn f_transform(y: f64, c: &Coefficients) -> f64 {
    c.f(y)
}

pub fn alpha(c: &Coefficients) -> f64 {
    c.alpha()
}

pub fn beta(c: &Coefficients) -> f64 {
    c.beta()
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

/// `G(t, x, y)`.
pub fn kernel_g(t: f64, x: f64, y: f64, c: &Coefficients) -> Result<f64> {
    check_time(t)?;
    Ok(c.g(t, x, y))
}

/// `∂G/∂x (t, x, y)` for `x != 0`.
pub fn kernel_dgdx(t: f64, x: f64, y: f64, c: &Coefficients) -> Result<f64> {
    check_time(t)?;
    if x == 0.0 {
        return Err(Error::InterfaceDerivative);
    }
    Ok(c.dgdx_branch(t, x, y, x > 0.0))
}

/// `∂G/∂x` with an explicit side. At `x = 0` this gives the one-sided
/// limit; elsewhere the side must agree with the sign of `x`.
pub fn kernel_dgdx_sided(t: f64, x: f64, y: f64, side: Side, c: &Coefficients) -> Result<f64> {
    check_time(t)?;
    let right = side == Side::Right;
    if x != 0.0 && (x > 0.0) != right {
        return Err(Error::SideMismatch { x, side });
    }
    Ok(c.dgdx_branch(t, x, y, right))
}

/// Interval of `y` outside which both Gaussian factors of `G(t, x, ·)` are
/// below `exp(-truncation_exponent)`.
pub fn support(c: &Coefficients, t: f64, x: f64, truncation_exponent: f64) -> (f64, f64) {
    let w = (2.0 * truncation_exponent * t).sqrt();
    let fx = c.f(x);
    // The reflected term lives on |f(y)| <= w - |f(x)|, which sits inside
    // this interval.
    (c.f_inverse(fx - w), c.f_inverse(fx + w))
}

/// Sorted breakpoints for an integral over `[lo, hi]` with the interface and
/// the given peaks inserted when they fall inside.
pub(crate) fn breakpoints(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(interior.iter().copied().filter(|p| *p > lo && *p < hi));
    pts.push(0.0);
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫ G(t, x, y) u0(y) dy` over the truncated support of `G`.
pub fn apply_semigroup<F>(
    t: f64,
    u0: F,
    x: f64,
    c: &Coefficients,
    quad: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_time(t)?;
    let (lo, hi) = support(c, t, x, quad.truncation_exponent);
    let pts = breakpoints(lo, hi, &[x]);
    let r = quadrature::integrate(|y| c.g(t, x, y) * u0(y), &pts, quad)?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a1: f64, a2: f64, r1: f64, r2: f64) -> Coefficients {
        Coefficients::new(a1, a2, r1, r2).unwrap()
    }

    #[test]
    fn f_transform_examples() {
        let k = c(4.0, 9.0, 1.0, 1.0);
        assert_eq!(f_transform(-2.0, &k), -1.0);
        assert_eq!(f_transform(0.0, &k), 0.0);
        assert_eq!(f_transform(3.0, &k), 1.0);
        assert_eq!(k.f_inverse(k.f(-2.5)), -2.5);
        assert_eq!(k.f_inverse(k.f(4.5)), 4.5);
    }

    #[test]
    fn rejects_non_positive() {
        for (i, bad) in [0.0, -1.0, f64::NAN].into_iter().enumerate() {
            let r = match i % 4 {
                0 => Coefficients::new(bad, 1.0, 1.0, 1.0),
                1 => Coefficients::new(1.0, bad, 1.0, 1.0),
                _ => Coefficients::new(1.0, 1.0, 1.0, bad),
            };
            assert!(matches!(r, Err(Error::NonPositiveCoefficient { .. })));
        }
        match Coefficients::new(1.0, 1.0, -2.0, 1.0) {
            Err(Error::NonPositiveCoefficient { name, .. }) => assert_eq!(name, "rho1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn alpha_beta_examples() {
        let h = c(1.5, 1.5, 2.0, 2.0);
        assert_eq!(alpha(&h), 0.0);
        assert_eq!(beta(&h), 0.0);
        let k = c(1.0, 2.0, 1.0, 1.0);
        assert_eq!(alpha(&k), 0.5);
        // (1 - √2/2) / (1 + √2/2), mpmath at 50 digits
        assert!((beta(&k) - 0.171_572_875_253_809_9).abs() < 1e-15);
    }

    #[test]
    fn beta_equals_skew_form() {
        // β = (ρ2√a2 − ρ1√a1)/(ρ2√a2 + ρ1√a1), a second algebraic route
        for (a1, a2, r1, r2) in [
            (1.0, 2.0, 1.0, 1.0),
            (3.0, 0.5, 2.0, 0.7),
            (0.1, 9.0, 4.0, 0.2),
        ] {
            let k = c(a1, a2, r1, r2);
            let alt = (r2 * a2.sqrt() - r1 * a1.sqrt()) / (r2 * a2.sqrt() + r1 * a1.sqrt());
            assert!((k.beta() - alt).abs() < 1e-14);
            assert!(k.beta().abs() < 1.0);
            assert!(k.alpha() < 1.0);
        }
    }

    #[test]
    fn homogeneous_origin_value() {
        let k = c(1.0, 1.0, 1.0, 1.0);
        let g = kernel_g(1.0, 0.0, 0.0, &k).unwrap();
        assert!((g - 0.398_942_280_401_432_7).abs() < 1e-16);
    }

    #[test]
    fn rejects_non_positive_time() {
        let k = c(1.0, 2.0, 1.0, 1.0);
        assert!(matches!(
            kernel_g(0.0, 0.1, 0.2, &k),
            Err(Error::NonPositiveTime(_))
        ));
        assert!(kernel_g(-1.0, 0.1, 0.2, &k).is_err());
        assert!(kernel_dgdx(0.0, 0.1, 0.2, &k).is_err());
    }

    #[test]
    fn cross_interface_terms_merge() {
        // x < 0 < y: G = (1 + β) / (√(2πt) √a2) exp(-(f(x) - f(y))² / 2t)
        let k = c(1.0, 2.0, 3.0, 0.5);
        let (t, x, y) = (0.7, -0.4, 0.9);
        let fd = x / 1.0 - y / 2f64.sqrt();
        let expect = (1.0 + k.beta()) / ((2.0 * PI * t).sqrt() * 2f64.sqrt())
            * (-(fd * fd) / (2.0 * t)).exp();
        let g = kernel_g(t, x, y, &k).unwrap();
        assert!((g - expect).abs() <= 1e-14 * expect);
    }

    #[test]
    fn sign_of_zero_groups_left() {
        // y = 0 uses the a1 prefactor and sign -1
        let k = c(1.0, 4.0, 1.0, 1.0);
        let (t, x): (f64, f64) = (0.3, 0.5);
        let e = (-(x / 2.0) * (x / 2.0) / (2.0 * t)).exp();
        let expect = (1.0 - k.beta()) * e / (2.0 * PI * t).sqrt();
        assert!((kernel_g(t, x, 0.0, &k).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_derivative_example() {
        let k = c(1.0, 1.0, 1.0, 1.0);
        let d = kernel_dgdx(1.0, 1.0, 0.0, &k).unwrap();
        assert!((d + (-0.5f64).exp() / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((d + 0.241_970_724_519_143_37).abs() < 1e-15);
    }

    #[test]
    fn derivative_at_interface_needs_side() {
        let k = c(1.0, 2.0, 1.0, 1.0);
        assert!(matches!(
            kernel_dgdx(1.0, 0.0, 0.3, &k),
            Err(Error::InterfaceDerivative)
        ));
        assert!(matches!(
            kernel_dgdx_sided(1.0, 0.5, 0.3, Side::Left, &k),
            Err(Error::SideMismatch { .. })
        ));
        assert!(kernel_dgdx_sided(1.0, -0.5, 0.3, Side::Left, &k).is_ok());
    }

    #[test]
    fn one_sided_limits_match_closed_forms() {
        let k = c(1.3, 2.2, 0.8, 1.7);
        let (a1, a2, b) = (1.3f64, 2.2f64, k.beta());
        for (t, y) in [(0.4, 0.6), (1.5, 2.0), (0.05, 0.1)] {
            let e = (-(y * y) / (2.0 * a2 * t)).exp();
            let root = (2.0 * PI * t).sqrt();
            let right = -y * (b - 1.0) / (root * a2 * t * a2.sqrt()) * e;
            let left =
                (1.0 + b) / (root * a2.sqrt()) * (a2.sqrt() * a1.sqrt() * y) / (a1 * a2 * t) * e;
            let r = kernel_dgdx_sided(t, 0.0, y, Side::Right, &k).unwrap();
            let l = kernel_dgdx_sided(t, 0.0, y, Side::Left, &k).unwrap();
            assert!(
                (r - right).abs() <= 1e-13 * right.abs().max(1.0),
                "{r} vs {right}"
            );
            assert!(
                (l - left).abs() <= 1e-13 * left.abs().max(1.0),
                "{l} vs {left}"
            );
        }
    }

    #[test]
    fn semigroup_action_on_constants() {
        let quad = QuadratureSpec::default();
        let k = c(1.0, 3.0, 2.0, 0.5);
        for x in [0.0, -0.7, 1.2] {
            let one = apply_semigroup(0.8, |_| 1.0, x, &k, &quad).unwrap();
            assert!((one - 1.0).abs() < 1e-10, "x = {x}: {one}");
            let zero = apply_semigroup(0.8, |_| 0.0, x, &k, &quad).unwrap();
            assert_eq!(zero, 0.0);
        }
    }

    #[test]
    fn gaussian_convolution() {
        // ∫ N(0,1)(y) e^{-y²/2} dy = 1/√2
        let quad = QuadratureSpec::default();
        let k = c(1.0, 1.0, 1.0, 1.0);
        let v = apply_semigroup(1.0, |y| (-0.5 * y * y).exp(), 0.0, &k, &quad).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn serde_validates() {
        let ok: Coefficients =
            serde_json::from_str(r#"{"a1":1,"a2":2,"rho1":1,"rho2":1}"#).unwrap();
        assert_eq!(ok.alpha(), 0.5);
        assert!(
            serde_json::from_str::<Coefficients>(r#"{"a1":-1,"a2":2,"rho1":1,"rho2":1}"#).is_err()
        );
        let back = serde_json::to_string(&ok).unwrap();
        assert_eq!(back, r#"{"a1":1.0,"a2":2.0,"rho1":1.0,"rho2":1.0}"#);
    }
}
