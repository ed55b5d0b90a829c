//! Randomized properties of the kernel and the mild field.

use proptest::prelude::*;
use skewheat::detcheck::{gaussian_gap, rho_symmetry};
use skewheat::kernel::{kernel_dgdx, kernel_dgdx_sided, kernel_g};
use skewheat::stochastic::{mild_field, NoiseField, SampleMoments, SpaceTimeGrid};
use skewheat::{Coefficients, Execution, Side};

fn coefficient() -> impl Strategy<Value = f64> {
    0.25f64..4.0
}

fn coefficients() -> impl Strategy<Value = Coefficients> {
    (coefficient(), coefficient(), coefficient(), coefficient())
        .prop_map(|(a1, a2, r1, r2)| Coefficients::new(a1, a2, r1, r2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn reduces_to_gaussian(a in coefficient(), rho in coefficient(), t in 0.05f64..3.0,
                           x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let c = Coefficients::homogeneous(a, rho).unwrap();
        prop_assert!(gaussian_gap(t, x, y, &c).unwrap() <= 1e-14);
    }

    #[test]
    fn positive(c in coefficients(), t in 0.05f64..3.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assert!(kernel_g(t, x, y, &c).unwrap() > 0.0);
    }

    #[test]
    fn continuous_across_interface(c in coefficients(), t in 0.05f64..3.0, y in -3.0f64..3.0) {
        let at = kernel_g(t, 0.0, y, &c).unwrap();
        let eps = f64::MIN_POSITIVE;
        for x in [-eps, eps] {
            prop_assert!((kernel_g(t, x, y, &c).unwrap() - at).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_differences(c in coefficients(), t in 0.1f64..2.0,
                                      x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let h = 1e-5;
        prop_assume!(x.abs() > 10.0 * h);
        let fd = (kernel_g(t, x + h, y, &c).unwrap() - kernel_g(t, x - h, y, &c).unwrap()) / (2.0 * h);
        let d = kernel_dgdx(t, x, y, &c).unwrap();
        prop_assert!((d - fd).abs() < 1e-6, "{} vs {}", d, fd);
    }

    #[test]
    fn one_sided_derivatives_are_limits(c in coefficients(), t in 0.1f64..2.0, y in -3.0f64..3.0) {
        let h = 1e-7;
        let left = kernel_dgdx_sided(t, 0.0, y, Side::Left, &c).unwrap();
        let right = kernel_dgdx_sided(t, 0.0, y, Side::Right, &c).unwrap();
        prop_assert!((left - kernel_dgdx(t, -h, y, &c).unwrap()).abs() < 1e-5);
        prop_assert!((right - kernel_dgdx(t, h, y, &c).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn rho_weighted_symmetry(c in coefficients(), t in 0.05f64..3.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(x != 0.0 && y != 0.0);
        prop_assert!(rho_symmetry(t, x, y, &c).unwrap() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mild_field_is_linear(c in coefficients(), seed in any::<u64>(), lambda in -3.0f64..3.0,
                            t in 0.1f64..1.0, x in -2.0f64..2.0) {
        let g = SpaceTimeGrid::new(1.0, 5.0, 16, 20).unwrap();
        let w = NoiseField::sample(&g, seed, 0, Execution::Sequential);
        let u = mild_field(&g, &w, &c, &[(t, x)], Execution::Sequential).unwrap().values[0];
        // powers of two scale exactly
        let u4 = mild_field(&g, &w.scaled(4.0), &c, &[(t, x)], Execution::Sequential).unwrap().values[0];
        prop_assert_eq!(u4, 4.0 * u);
        let ul = mild_field(&g, &w.scaled(lambda), &c, &[(t, x)], Execution::Sequential).unwrap().values[0];
        prop_assert!((ul - lambda * u).abs() <= 1e-12 * (lambda * u).abs().max(1e-12));
    }
}

/// Coupled refinement: RMS differences between successive dyadic levels
/// shrink.
#[test]
fn coupled_refinement_converges() {
    let c = Coefficients::new(1.0, 2.0, 1.0, 1.0).unwrap();
    let fine = SpaceTimeGrid::new(1.0, 9.0, 512, 512).unwrap();
    let points: Vec<(f64, f64)> = (0..8).map(|k| (1.0, -1.4 + 0.4 * k as f64)).collect();
    let mut rms_diffs = Vec::new();
    for seed in 0..4u64 {
        let w = NoiseField::sample(&fine, 100 + seed, 0, Execution::default());
        let fields: Vec<Vec<f64>> = [64usize, 128, 256, 512]
            .iter()
            .map(|&n| {
                let grid = fine.coarsen(512 / n, 512 / n).unwrap();
                let noise = w.coarsen(512 / n, 512 / n).unwrap();
                mild_field(&grid, &noise, &c, &points, Execution::default())
                    .unwrap()
                    .values
            })
            .collect();
        let diffs: Vec<f64> = fields
            .windows(2)
            .map(|p| {
                let s: f64 = p[0].iter().zip(&p[1]).map(|(a, b)| (a - b) * (a - b)).sum();
                (s / points.len() as f64).sqrt()
            })
            .collect();
        rms_diffs.push(diffs);
    }
    let mean: Vec<f64> = (0..3)
        .map(|k| rms_diffs.iter().map(|d| d[k]).sum::<f64>() / 4.0)
        .collect();
    assert!(mean[0] > mean[1] && mean[1] > mean[2], "{mean:?}");
}

#[test]
fn replicates_are_gaussian() {
    let c = Coefficients::new(1.0, 3.0, 2.0, 1.0).unwrap();
    let g = SpaceTimeGrid::new(1.0, 8.0, 32, 64).unwrap();
    let s =
        skewheat::stochastic::monte_carlo(&g, &c, &[(1.0, 0.3)], 77, 4000, Execution::default())
            .unwrap();
    let m = SampleMoments::from_values(&s.iter().map(|s| s.values[0]).collect::<Vec<_>>()).unwrap();
    assert!(m.looks_gaussian(4.0), "{m:?}");
    assert!(m.mean.abs() < 4.0 * (m.variance / m.count as f64).sqrt());
}
