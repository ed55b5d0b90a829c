//! Deterministic identities satisfied by the kernel: flux matching at the
//! interface, the PDE away from `x = 0` and `x = y`, Chapman–Kolmogorov,
//! unit mass and ρ-weighted symmetry. Each check returns a non-negative
//! defect; [`scan_identity`] folds a check over a seeded point cloud.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, breakpoints, support, Coefficients, Side};
use crate::par::Execution;
use crate::quadrature::{self, QuadratureSpec};
use crate::tolerances::Tolerances;

pub const DEFAULT_SCAN_SEED: u64 = 0x5_eed0_f1e5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    FluxJump,
    PdeResidual,
    Semigroup,
    Normalization,
    RhoSymmetry,
}

impl Identity {
    pub const ALL: [Identity; 5] = [
        Identity::FluxJump,
        Identity::PdeResidual,
        Identity::Semigroup,
        Identity::Normalization,
        Identity::RhoSymmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::FluxJump => "flux_jump",
            Identity::PdeResidual => "pde_residual",
            Identity::Semigroup => "semigroup",
            Identity::Normalization => "normalization",
            Identity::RhoSymmetry => "rho_symmetry",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `a1 ρ1 ∂ₓG(t, 0⁻, y) - a2 ρ2 ∂ₓG(t, 0⁺, y)`.
pub fn flux_jump(t: f64, y: f64, c: &Coefficients) -> Result<f64> {
    let (left, right) = flux_terms(t, y, c)?;
    Ok(left - right)
}

/// The two fluxes `(a1 ρ1 ∂ₓG(0⁻), a2 ρ2 ∂ₓG(0⁺))`.
pub fn flux_terms(t: f64, y: f64, c: &Coefficients) -> Result<(f64, f64)> {
    if y == 0.0 {
        return Err(Error::Precondition("flux_jump needs y != 0".into()));
    }
    let l = kernel::kernel_dgdx_sided(t, 0.0, y, Side::Left, c)?;
    let r = kernel::kernel_dgdx_sided(t, 0.0, y, Side::Right, c)?;
    Ok((c.a1() * c.rho1() * l, c.a2() * c.rho2() * r))
}

/// Central-difference estimate of `∂G/∂t - (A(x)/2) ∂²G/∂x²` at a point
/// off the interface and off the diagonal.
pub fn pde_residual(t: f64, x: f64, y: f64, c: &Coefficients, h_t: f64, h_x: f64) -> Result<f64> {
    pde_residual_with_radius(t, x, y, c, h_t, h_x, Tolerances::default().exclusion_radius)
}

pub fn pde_residual_with_radius(
    t: f64,
    x: f64,
    y: f64,
    c: &Coefficients,
    h_t: f64,
    h_x: f64,
    radius: f64,
) -> Result<f64> {
    if !(h_t > 0.0 && h_x > 0.0) {
        return Err(Error::Precondition("steps must be positive".into()));
    }
    if !(t - h_t > 0.0) {
        return Err(Error::Precondition(format!(
            "t - h_t must be positive (t = {t}, h_t = {h_t})"
        )));
    }
    if x == 0.0 || x == y || x.abs().min((x - y).abs()) <= radius * h_x {
        return Err(Error::Precondition(format!(
            "x = {x} must lie more than {radius} h_x from 0 and from y = {y}"
        )));
    }
    let g_t = (c.g(t + h_t, x, y) - c.g(t - h_t, x, y)) / (2.0 * h_t);
    let g_xx = (c.g(t, x + h_x, y) - 2.0 * c.g(t, x, y) + c.g(t, x - h_x, y)) / (h_x * h_x);
    Ok(g_t - 0.5 * c.diffusivity(x) * g_xx)
}

/// `|G(t1 + t2, x, y) - ∫ G(t1, x, z) G(t2, z, y) dz|`.
///
/// Fails with [`Error::Unresolved`] when the narrower factor is too thin for
/// the finest panels over the combined support of both factors.
pub fn semigroup_residual(
    t1: f64,
    t2: f64,
    x: f64,
    y: f64,
    c: &Coefficients,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let whole = kernel::kernel_g(t1 + t2, x, y, c)?;
    let conv = chapman_kolmogorov(t1, t2, x, y, c, quad)?;
    Ok((whole - conv).abs())
}

/// `∫ G(t1, x, z) G(t2, z, y) dz`.
pub fn chapman_kolmogorov(
    t1: f64,
    t2: f64,
    x: f64,
    y: f64,
    c: &Coefficients,
    quad: &QuadratureSpec,
) -> Result<f64> {
    for t in [t1, t2] {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
    }
    let e = quad.truncation_exponent;
    // G(t1, x, ·) is supported near f(z) ≈ f(x); G(t2, ·, y) as a function
    // of its first argument near f(z) ≈ f(y). Both have the same form.
    let (lo1, hi1) = support(c, t1, x, e);
    let (lo2, hi2) = support(c, t2, y, e);
    let width = (c.min_diffusivity() * t1.min(t2)).sqrt();
    quad.check_resolution(width, hi1.max(hi2) - lo1.min(lo2))?;
    let (lo, hi) = (lo1.max(lo2), hi1.min(hi2));
    if !(lo < hi) {
        return Ok(0.0);
    }
    let pts = breakpoints(lo, hi, &[x, y]);
    let r = quadrature::integrate(|z| c.g(t1, x, z) * c.g(t2, z, y), &pts, quad)?;
    Ok(r.value)
}

/// `|∫ G(t, x, y) dy - 1|`.
pub fn normalization_gap(t: f64, x: f64, c: &Coefficients, quad: &QuadratureSpec) -> Result<f64> {
    let mass = kernel::apply_semigroup(t, |_| 1.0, x, c, quad)?;
    Ok((mass - 1.0).abs())
}

/// `sup_x ∫ |G(t, x, y)| dy` over the given `x` values; the constant in the
/// integral bound used for the mild solution.
pub fn integral_bound(t: f64, xs: &[f64], c: &Coefficients, quad: &QuadratureSpec) -> Result<f64> {
    let mut sup = 0.0f64;
    for &x in xs {
        let m = kernel::apply_semigroup(t, |_| 1.0, x, c, quad)?;
        sup = sup.max(m);
    }
    Ok(sup)
}

/// `|ρ(x) G(t, x, y) - ρ(y) G(t, y, x)| / max(ρ(x) G(t, x, y), tiny)`.
pub fn rho_symmetry(t: f64, x: f64, y: f64, c: &Coefficients) -> Result<f64> {
    let lhs = c.density(x) * kernel::kernel_g(t, x, y, c)?;
    let rhs = c.density(y) * kernel::kernel_g(t, y, x, c)?;
    Ok((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE))
}

/// `|G - g_a| / g_a` against the plain heat kernel
/// `g_a(t, x, y) = exp(-(x - y)² / 2at) / √(2π a t)`; needs homogeneous
/// coefficients.
pub fn gaussian_gap(t: f64, x: f64, y: f64, c: &Coefficients) -> Result<f64> {
    if !c.is_homogeneous() {
        return Err(Error::Precondition(
            "gaussian_gap needs a1 = a2 and rho1 = rho2".into(),
        ));
    }
    let a = c.a1();
    let d = x - y;
    let heat = (-d * d / (2.0 * a * t)).exp() / (2.0 * std::f64::consts::PI * a * t).sqrt();
    let g = kernel::kernel_g(t, x, y, c)?;
    Ok((g - heat).abs() / heat)
}

/// Region and seed of a randomized point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    /// Spatial step of the PDE stencil; `h_t = h_x²`.
    pub h_x: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            count: 1000,
            seed: DEFAULT_SCAN_SEED,
            t_range: (0.1, 2.0),
            x_range: (-3.0, 3.0),
            h_x: 1e-2,
        }
    }
}

/// Worst case of one identity over a point cloud.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub max_abs_error: f64,
    pub sample_count: usize,
    /// `(t, x, y)`; for the semigroup check `t` is `t1`.
    pub worst_point: (f64, f64, f64),
    /// `t2` of the worst semigroup sample.
    pub worst_aux: Option<f64>,
    pub seed: u64,
}

impl IdentityReport {
    pub const CSV_HEADER: &'static str =
        "identity_name,max_abs_error,sample_count,worst_t,worst_x,worst_y,seed";

    pub fn csv_row(&self) -> String {
        let (t, x, y) = self.worst_point;
        format!(
            "{},{},{},{},{},{},{}",
            self.identity,
            crate::cli::output::fmt_f64(self.max_abs_error),
            self.sample_count,
            crate::cli::output::fmt_f64(t),
            crate::cli::output::fmt_f64(x),
            crate::cli::output::fmt_f64(y),
            self.seed
        )
    }
}

/// One sampled point: `(t, x, y, t2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub t2: f64,
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (hi - lo) * u
}

/// Draws the point cloud for an identity. Points that violate the
/// identity's exclusion rules are redrawn, so the cloud depends only on the
/// spec and the identity.
pub fn sample_points(identity: Identity, spec: &SampleSpec, radius: f64) -> Vec<SamplePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (t_lo, t_hi) = spec.t_range;
    let (x_lo, x_hi) = spec.x_range;
    let h = spec.h_x;
    let mut out = Vec::with_capacity(spec.count);
    while out.len() < spec.count {
        let t = uniform(&mut rng, t_lo, t_hi);
        let x = uniform(&mut rng, x_lo, x_hi);
        let y = uniform(&mut rng, x_lo, x_hi);
        let t2 = uniform(&mut rng, t_lo, t_hi);
        let ok = match identity {
            Identity::FluxJump => y != 0.0,
            Identity::PdeResidual => x.abs().min((x - y).abs()) > radius * h && t - h * h > 0.0,
            Identity::RhoSymmetry => x != 0.0 && y != 0.0,
            Identity::Semigroup | Identity::Normalization => true,
        };
        if ok {
            let x = if identity == Identity::FluxJump {
                0.0
            } else {
                x
            };
            out.push(SamplePoint { t, x, y, t2 });
        }
    }
    out
}

fn evaluate(
    identity: Identity,
    p: &SamplePoint,
    c: &Coefficients,
    tol: &Tolerances,
    h_x: f64,
) -> Result<f64> {
    match identity {
        Identity::FluxJump => {
            let (l, r) = flux_terms(p.t, p.y, c)?;
            Ok((l - r).abs() / l.abs().max(r.abs()).max(1.0))
        }
        Identity::PdeResidual => {
            pde_residual_with_radius(p.t, p.x, p.y, c, h_x * h_x, h_x, tol.exclusion_radius)
                .map(f64::abs)
        }
        Identity::Semigroup => semigroup_residual(p.t, p.t2, p.x, p.y, c, &tol.quadrature),
        Identity::Normalization => normalization_gap(p.t, p.x, c, &tol.quadrature),
        Identity::RhoSymmetry => rho_symmetry(p.t, p.x, p.y, c),
    }
}

/// Evaluates `identity` over the seeded cloud and reports the worst point.
///
/// Flux defects are scaled by `max(|left|, |right|, 1)` and symmetry defects
/// are relative; the others are absolute. Ties keep the earliest sample.
pub fn scan_identity(
    identity: Identity,
    spec: &SampleSpec,
    c: &Coefficients,
    tol: &Tolerances,
    exec: Execution,
) -> Result<IdentityReport> {
    if spec.count == 0 {
        return Err(Error::EmptySample);
    }
    let points = sample_points(identity, spec, tol.exclusion_radius);
    let errors = exec.map_slice(&points, |p| {
        evaluate(identity, p, c, tol, spec.h_x).map_err(|e| Error::ScanFailed {
            identity: identity.name(),
            t: p.t,
            x: p.x,
            y: p.y,
            source: Box::new(e),
        })
    });
    let mut worst = 0usize;
    let mut max = f64::NEG_INFINITY;
    for (i, e) in errors.into_iter().enumerate() {
        let e = e?;
        if e > max || e.is_nan() {
            max = e;
            worst = i;
        }
    }
    let p = points[worst];
    Ok(IdentityReport {
        identity,
        max_abs_error: max,
        sample_count: points.len(),
        worst_point: (p.t, p.x, p.y),
        worst_aux: (identity == Identity::Semigroup).then_some(p.t2),
        seed: spec.seed,
    })
}

/// Convergence of the PDE residual over a ladder of `h_x` (with
/// `h_t = h_x²`) on one point cloud drawn for the coarsest step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdeConvergence {
    pub steps: Vec<f64>,
    /// max |residual| over the cloud, per step
    pub max_residual: Vec<f64>,
    /// log2 ratio of successive maxima (for halving steps)
    pub observed_order: Vec<f64>,
    /// median over points of the per-point observed order, per ladder pair
    pub median_point_order: Vec<f64>,
}

pub fn pde_convergence(
    spec: &SampleSpec,
    steps: &[f64],
    c: &Coefficients,
    tol: &Tolerances,
    exec: Execution,
) -> Result<PdeConvergence> {
    if spec.count == 0 {
        return Err(Error::EmptySample);
    }
    if steps.len() < 2 {
        return Err(Error::Precondition("need at least two steps".into()));
    }
    let coarsest = steps.iter().copied().fold(0.0, f64::max);
    let cloud = SampleSpec {
        h_x: coarsest,
        ..spec.clone()
    };
    let points = sample_points(Identity::PdeResidual, &cloud, tol.exclusion_radius);
    let per_point: Vec<Vec<f64>> = exec
        .map_slice(&points, |p| {
            steps
                .iter()
                .map(|&h| {
                    pde_residual_with_radius(p.t, p.x, p.y, c, h * h, h, tol.exclusion_radius)
                        .map(f64::abs)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let max_residual: Vec<f64> = (0..steps.len())
        .map(|k| per_point.iter().map(|r| r[k]).fold(0.0, f64::max))
        .collect();
    let observed_order = (1..steps.len())
        .map(|k| (max_residual[k - 1] / max_residual[k]).ln() / (steps[k - 1] / steps[k]).ln())
        .collect();
    let median_point_order = (1..steps.len())
        .map(|k| {
            let mut o: Vec<f64> = per_point
                .iter()
                .map(|r| (r[k - 1] / r[k]).ln() / (steps[k - 1] / steps[k]).ln())
                .collect();
            median(&mut o)
        })
        .collect();
    Ok(PdeConvergence {
        steps: steps.to_vec(),
        max_residual,
        observed_order,
        median_point_order,
    })
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
