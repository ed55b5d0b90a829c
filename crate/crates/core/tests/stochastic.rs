//! Statistical checks of the noise pairing and the weak residual.

use skewheat::quadrature::integrate;
use skewheat::stochastic::{
    covariance_quadrature, monte_carlo, NoiseField, SampleMoments, SpaceTimeGrid,
};
use skewheat::weakform::{equivalence_residual, weak_rhs, TestFunction};
use skewheat::{Coefficients, Execution, QuadratureSpec};

/// `∬ φ² ρ²` by nested quadrature, split at the interface.
fn phi_rho_squared(phi: &TestFunction, c: &Coefficients) -> f64 {
    let spec = QuadratureSpec {
        abs_tol: 1e-12,
        ..QuadratureSpec::default()
    };
    let (s_lo, s_hi) = phi.time_support();
    let (x_lo, x_hi) = phi.space_support();
    integrate(
        |s| {
            integrate(
                |x| (phi.value(s, x) * c.density(x)).powi(2),
                &[x_lo, 0.0, x_hi],
                &spec,
            )
            .unwrap()
            .value
        },
        &[s_lo, s_hi],
        &spec,
    )
    .unwrap()
    .value
}

#[test]
fn noise_pairing_has_isometry_variance() {
    let c = Coefficients::new(1.0, 2.0, 1.0, 2.0).unwrap();
    let grid = SpaceTimeGrid::new(1.0, 4.0, 64, 64).unwrap();
    let phi = TestFunction::new(0.5, 1.0 / 3.0, 0.25, 1.0, 1.0, 1.0).unwrap();
    let values: Vec<f64> = (0..4000u64)
        .map(|seed| {
            let w = NoiseField::sample(&grid, seed, 0, Execution::Sequential);
            weak_rhs(&w, &phi, |_| 0.0, &c).unwrap().0
        })
        .collect();
    let m = SampleMoments::from_values(&values).unwrap();
    let expected = phi_rho_squared(&phi, &c);
    assert!(
        m.mean.abs() < 4.0 * (m.variance / m.count as f64).sqrt(),
        "{m:?}"
    );
    assert!(
        (m.variance - expected).abs() < 4.0 * m.variance_se(),
        "{} vs {expected}",
        m.variance
    );
}

#[test]
fn weak_residual_has_zero_mean() {
    let c = Coefficients::new(1.0, 2.5, 1.5, 0.8).unwrap();
    let grid = SpaceTimeGrid::new(1.0, 8.0, 128, 128).unwrap();
    let phi = TestFunction::new(0.5, 1.0 / 3.0, 0.25, 1.0, 1.0, 1.0).unwrap();
    let residuals: Vec<f64> = (0..20u64)
        .map(|seed| {
            equivalence_residual(&grid, 500 + seed, &phi, &c, Execution::default())
                .unwrap()
                .residual
        })
        .collect();
    let m = SampleMoments::from_values(&residuals).unwrap();
    assert!(
        m.mean.abs() <= 4.0 * (m.variance / m.count as f64).sqrt(),
        "{m:?}"
    );
}

#[test]
fn covariance_matches_replicates() {
    let c = Coefficients::new(1.0, 2.0, 1.0, 1.0).unwrap();
    let grid = SpaceTimeGrid::new(1.0, 9.0, 128, 128).unwrap();
    let points = [(1.0, -0.3), (1.0, 0.5)];
    let samples = monte_carlo(&grid, &c, &points, 31, 3000, Execution::default()).unwrap();
    let n = samples.len() as f64;
    let mean = |k: usize| samples.iter().map(|s| s.values[k]).sum::<f64>() / n;
    let (m0, m1) = (mean(0), mean(1));
    let cov = samples
        .iter()
        .map(|s| (s.values[0] - m0) * (s.values[1] - m1))
        .sum::<f64>()
        / (n - 1.0);
    let var = |k: usize, m: f64| {
        samples
            .iter()
            .map(|s| (s.values[k] - m).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    };
    let se = ((var(0, m0) * var(1, m1) + cov * cov) / n).sqrt();
    let quad = QuadratureSpec::default();
    let expected = covariance_quadrature(1.0, -0.3, 0.5, &c, &quad).unwrap();
    assert!(
        (cov - expected).abs() < 4.0 * se,
        "{cov} vs {expected} (se {se})"
    );
}

#[test]
fn covariance_decays_with_separation() {
    let c = Coefficients::new(1.0, 3.0, 2.0, 1.0).unwrap();
    let quad = QuadratureSpec::default();
    let covs: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|d| covariance_quadrature(1.0, -0.2, -0.2 + d, &c, &quad).unwrap())
        .collect();
    assert!(
        covs.windows(2).all(|w| w[0] > w[1] && w[1] > 0.0),
        "{covs:?}"
    );
}
