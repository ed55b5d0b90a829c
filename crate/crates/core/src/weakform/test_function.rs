use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `φ(s, x) = amplitude · b((s - s0)/r_s) · b((x - x0)/r_x)` with
/// `b(z) = exp(-1/(1 - z²))` on `|z| < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunction {
    pub s0: f64,
    pub r_s: f64,
    pub x0: f64,
    pub r_x: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhiValues {
    pub value: f64,
    pub ds: f64,
    pub dx: f64,
    pub dxx: f64,
}

/// `(b, b', b'')`, all zero outside `(-1, 1)`.
#[inline]
fn bump(z: f64) -> (f64, f64, f64) {
    if z.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - z * z;
    let b = (-1.0 / q).exp();
    if b == 0.0 {
        // q⁴ may have underflowed too
        return (0.0, 0.0, 0.0);
    }
    let q2 = q * q;
    let z2 = z * z;
    (b, -2.0 * z * b / q2, b * (6.0 * z2 * z2 - 2.0) / (q2 * q2))
}

impl TestFunction {
    /// Checks radii and that the time support lies strictly inside `(0, T)`.
    pub fn new(s0: f64, r_s: f64, x0: f64, r_x: f64, amplitude: f64, horizon: f64) -> Result<Self> {
        let phi = Self {
            s0,
            r_s,
            x0,
            r_x,
            amplitude,
        };
        phi.validate(horizon)?;
        Ok(phi)
    }

    /// Straddles the interface: `s0 = T/2`, `r_s = T/3`, `x0 = 0`, `r_x = 1`.
    pub fn straddling(horizon: f64) -> Self {
        Self {
            s0: horizon / 2.0,
            r_s: horizon / 3.0,
            x0: 0.0,
            r_x: 1.0,
            amplitude: 1.0,
        }
    }

    /// Same bump shifted to `x0 = 2`, clear of the interface.
    pub fn offset(horizon: f64) -> Self {
        Self {
            x0: 2.0,
            ..Self::straddling(horizon)
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        let all = [self.s0, self.r_s, self.x0, self.r_x, self.amplitude];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTestFunction(
                "parameters must be finite".into(),
            ));
        }
        if !(self.r_s > 0.0 && self.r_x > 0.0) {
            return Err(Error::InvalidTestFunction(format!(
                "radii must be positive, got r_s = {}, r_x = {}",
                self.r_s, self.r_x
            )));
        }
        let (lo, hi) = self.time_support();
        if !(lo > 0.0 && hi < horizon) {
            return Err(Error::InvalidTestFunction(format!(
                "time support [{lo}, {hi}] is not inside (0, {horizon})"
            )));
        }
        Ok(())
    }

    pub fn time_support(&self) -> (f64, f64) {
        (self.s0 - self.r_s, self.s0 + self.r_s)
    }

    pub fn space_support(&self) -> (f64, f64) {
        (self.x0 - self.r_x, self.x0 + self.r_x)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitude: self.amplitude * factor,
            ..*self
        }
    }

    pub fn value(&self, s: f64, x: f64) -> f64 {
        let (bs, _, _) = bump((s - self.s0) / self.r_s);
        let (bx, _, _) = bump((x - self.x0) / self.r_x);
        self.amplitude * bs * bx
    }

    pub fn eval(&self, s: f64, x: f64) -> PhiValues {
        let (bs, dbs, _) = bump((s - self.s0) / self.r_s);
        let (bx, dbx, ddbx) = bump((x - self.x0) / self.r_x);
        let a = self.amplitude;
        PhiValues {
            value: a * bs * bx,
            ds: a * dbs * bx / self.r_s,
            dx: a * bs * dbx / self.r_x,
            dxx: a * bs * ddbx / (self.r_x * self.r_x),
        }
    }
}

pub fn eval_test_fn(phi: &TestFunction, s: f64, x: f64) -> PhiValues {
    phi.eval(s, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> TestFunction {
        TestFunction::new(0.5, 0.3, 0.2, 0.9, 1.7, 1.0).unwrap()
    }

    #[test]
    fn centre_value() {
        let p = phi();
        let v = p.eval(0.5, 0.2);
        assert!((v.value - 1.7 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!((v.ds, v.dx), (0.0, 0.0));
    }

    #[test]
    fn zero_outside_support() {
        let p = phi();
        for (s, x) in [(0.1, 0.2), (0.5, 1.1), (0.8, 0.2), (0.5, -0.7), (0.9, 3.0)] {
            assert_eq!(p.eval(s, x), PhiValues::default());
        }
        // right at the edge of (-1, 1) everything underflows without NaN
        let v = p.eval(0.5, 0.2 + 0.9 * (1.0 - 1e-12));
        assert!(v.value == 0.0 && v.dxx == 0.0 && !v.dxx.is_nan());
    }

    #[test]
    fn derivatives_match_differences() {
        let p = phi();
        let h = 1e-4;
        for &(s, x) in &[(0.45, 0.3), (0.6, -0.4), (0.35, 0.9), (0.7, 0.05)] {
            let v = p.eval(s, x);
            let ds = (p.value(s + h, x) - p.value(s - h, x)) / (2.0 * h);
            let dx = (p.value(s, x + h) - p.value(s, x - h)) / (2.0 * h);
            let dxx = (p.value(s, x + h) - 2.0 * v.value + p.value(s, x - h)) / (h * h);
            assert!((v.ds - ds).abs() < 1e-6, "{} {}", v.ds, ds);
            assert!((v.dx - dx).abs() < 1e-6, "{} {}", v.dx, dx);
            assert!((v.dxx - dxx).abs() < 1e-4, "{} {}", v.dxx, dxx);
        }
    }

    #[test]
    fn rejects_bad_support() {
        assert!(TestFunction::new(0.5, 0.5, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(TestFunction::new(0.5, 0.2, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(TestFunction::new(0.9, 0.2, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(TestFunction::straddling(1.0).validate(1.0).is_ok());
        assert!(TestFunction::offset(2.0).validate(2.0).is_ok());
    }
}
