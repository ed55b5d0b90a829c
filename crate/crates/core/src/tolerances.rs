//! Numeric tolerances and acceptance thresholds in one record.
//!
//! Every field has a default; a run configuration may override any subset.

use serde::{Deserialize, Serialize};

use crate::quadrature::QuadratureSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature: QuadratureSpec,
    /// Relative agreement of the kernel with the plain Gaussian when
    /// coefficients are homogeneous.
    pub gaussian_rel: f64,
    /// Interface flux mismatch, scaled by `max(|left|, |right|, 1)`.
    pub flux_abs: f64,
    /// ρ-weighted symmetry, relative.
    pub symmetry_rel: f64,
    /// Jump of `G` across `x = 0`.
    pub continuity_abs: f64,
    pub semigroup_abs: f64,
    pub normalization_abs: f64,
    /// Minimum observed order of the finite-difference PDE residual.
    pub pde_min_order: f64,
    /// Exclusion radius around `x = 0` and `x = y`, in units of `h_x`.
    pub exclusion_radius: f64,
    /// Standard errors allowed between Monte Carlo and an analytic variance.
    pub mc_sigmas_analytic: f64,
    /// Standard errors allowed between Monte Carlo and quadrature variance.
    pub mc_sigmas_quadrature: f64,
    /// Bound on |skewness| / √(6/N) and |excess kurtosis| / √(24/N).
    pub normality_sigmas: f64,
    /// Largest admissible median relative weak residual.
    pub weak_rel_max: f64,
    /// Noise support must exceed the evaluation region by this many
    /// diffusion lengths `sqrt(max(a1, a2) T)`.
    pub margin_lengths: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            gaussian_rel: 1e-14,
            flux_abs: 1e-12,
            symmetry_rel: 1e-12,
            continuity_abs: 1e-12,
            semigroup_abs: 1e-8,
            normalization_abs: 1e-8,
            pde_min_order: 1.7,
            exclusion_radius: 10.0,
            mc_sigmas_analytic: 3.0,
            mc_sigmas_quadrature: 4.0,
            normality_sigmas: 4.0,
            weak_rel_max: 0.1,
            margin_lengths: 6.0,
        }
    }
}

/// Floor used when a residual is divided by the field RMS.
pub const RMS_FLOOR: f64 = 1e-12;
