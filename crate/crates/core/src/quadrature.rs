//! Adaptive composite Gauss–Legendre quadrature on finite intervals.
//!
//! The integration range is given as a sorted list of breakpoints. Each
//! segment between breakpoints starts with `initial_panels` equal panels; a
//! panel is accepted when the 15-point rule on the whole panel and on its two
//! halves agree to within the panel's share of `abs_tol`, and bisected
//! otherwise, down to `max_depth` levels.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORDER: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Target for the sum of |coarse - fine| over accepted panels.
    pub abs_tol: f64,
    pub initial_panels: usize,
    pub max_depth: u32,
    /// Integrands built from `G` are truncated where the Gaussian exponent
    /// drops below `-truncation_exponent`.
    pub truncation_exponent: f64,
    /// An integrand narrower than this many finest panels is flagged as
    /// unresolved rather than integrated.
    pub min_panels_per_width: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            initial_panels: 8,
            max_depth: 12,
            truncation_exponent: 40.0,
            min_panels_per_width: 5.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Width of the smallest panel refinement can reach on a span.
    pub fn finest_panel(&self, span: f64) -> f64 {
        span / (self.initial_panels.max(1) as f64 * 2f64.powi(self.max_depth as i32))
    }

    /// Rejects an integrand of effective `width` on a domain of length `span`
    /// when the finest panels cannot resolve it.
    pub fn check_resolution(&self, width: f64, span: f64) -> Result<()> {
        let min_panel = self.finest_panel(span);
        if width < self.min_panels_per_width * min_panel {
            return Err(Error::Unresolved {
                width,
                min_panel,
                panels: self.min_panels_per_width,
            });
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.initial_panels == 0 {
            return Err(Error::Precondition(
                "quadrature needs abs_tol > 0 and at least one initial panel".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of |coarse - fine| over accepted panels.
    pub error: f64,
    pub evaluations: usize,
}

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(ORDER);
        let mut r = Rule {
            nodes: [0.0; ORDER],
            weights: [0.0; ORDER],
        };
        r.nodes.copy_from_slice(&nodes);
        r.weights.copy_from_slice(&weights);
        r
    })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn apply_rule<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        s += w * f(mid + half * x);
    }
    s * half
}

struct Acc {
    value: f64,
    error: f64,
    evaluations: usize,
    failed: bool,
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    depth: u32,
    tol_density: f64,
    spec: &QuadratureSpec,
    acc: &mut Acc,
) {
    let m = 0.5 * (a + b);
    let left = apply_rule(f, a, m);
    let right = apply_rule(f, m, b);
    acc.evaluations += 2 * ORDER;
    let fine = left + right;
    let diff = (fine - whole).abs();
    let local = (tol_density * (b - a)).max(4.0 * f64::EPSILON * fine.abs());
    if diff <= local || !(m > a && m < b) {
        acc.value += fine;
        acc.error += diff;
    } else if depth >= spec.max_depth {
        acc.value += fine;
        acc.error += diff;
        acc.failed = true;
    } else {
        refine(f, a, m, left, depth + 1, tol_density, spec, acc);
        refine(f, m, b, right, depth + 1, tol_density, spec, acc);
    }
}

/// Integrates `f` over `[points[0], points[last]]`, treating every interior
/// point as a panel boundary.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    let mut pts: Vec<f64> = points.to_vec();
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(Error::Precondition("breakpoints must be finite".into()));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut acc = Acc {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        failed: false,
    };
    if pts.len() < 2 {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let span = pts[pts.len() - 1] - pts[0];
    let tol_density = spec.abs_tol / span;
    for seg in pts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let n = spec.initial_panels;
        let h = (b - a) / n as f64;
        for k in 0..n {
            let pa = a + h * k as f64;
            let pb = if k + 1 == n {
                b
            } else {
                a + h * (k + 1) as f64
            };
            let whole = apply_rule(&mut f, pa, pb);
            acc.evaluations += ORDER;
            refine(&mut f, pa, pb, whole, 0, tol_density, spec, &mut acc);
        }
    }
    // Panels stuck at max depth are tolerated while the summed estimate
    // still meets the request.
    if acc.failed && !(acc.error <= spec.abs_tol) {
        return Err(Error::QuadratureNotConverged {
            achieved: acc.error,
            requested: spec.abs_tol,
        });
    }
    Ok(Integral {
        value: acc.value,
        error: acc.error,
        evaluations: acc.evaluations,
    })
}
