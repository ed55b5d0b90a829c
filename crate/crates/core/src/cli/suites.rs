//! The five verification suites behind `skewheat run`.

use std::fmt::Write as _;
use std::io::Write;

use super::config::{RunConfig, Suite};
use super::output::{fmt_f64, write_atomic, Record, Summary};
use super::CliError;
use crate::detcheck::{
    gaussian_gap, pde_convergence, sample_points, scan_identity, Identity, IdentityReport,
    SampleSpec,
};
use crate::kernel::Coefficients;
use crate::par::Execution;
use crate::stochastic::{monte_carlo, variance_quadrature, FieldSample, NoiseField, SampleMoments};
use crate::weakform::{equivalence_residuals, refinement_study, RefinementTable};

/// PDE residual step ladder; `h_t = h_x²`.
pub const PDE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Runs every configured suite in order, writing one CSV per suite (the
/// Monte Carlo and identity suites add a detail file) and `summary.json`.
pub fn run_suites(
    cfg: &RunConfig,
    exec: Execution,
    log: &mut dyn Write,
) -> Result<Summary, CliError> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    if let Some(msg) = margin_warning(cfg) {
        let _ = writeln!(log, "warning: {msg}");
    }
    let mut records = Vec::new();
    for &suite in &cfg.suites {
        let _ = writeln!(log, "{}: running", suite.name());
        let out = match suite {
            Suite::KernelChecks => kernel_checks(cfg, exec)?,
            Suite::IdentityScan => identity_scan(cfg, exec)?,
            Suite::McVariance => mc_variance(cfg, exec)?,
            Suite::WeakEquivalence => weak_equivalence(cfg, exec)?,
            Suite::Refinement => refinement(cfg, exec)?,
        };
        for (name, body) in &out.files {
            let path = cfg.output_dir.join(name);
            write_atomic(&path, body.as_bytes()).map_err(|e| CliError::io(&path, e))?;
        }
        let passed = out.records.iter().filter(|r| r.pass).count();
        let _ = writeln!(
            log,
            "{}: {passed}/{} criteria pass",
            suite.name(),
            out.records.len()
        );
        records.extend(out.records);
    }
    let summary = Summary::new(records);
    let path = cfg.output_dir.join("summary.json");
    write_atomic(&path, summary.to_json().as_bytes()).map_err(|e| CliError::io(&path, e))?;
    Ok(summary)
}

/// Warns when the noise window `[-L, L]` leaves less than
/// `margin_lengths · √(max(a1, a2) T)` beyond the evaluation region.
pub fn margin_warning(cfg: &RunConfig) -> Option<String> {
    let uses_noise = cfg.suites.iter().any(|s| {
        matches!(
            s,
            Suite::McVariance | Suite::WeakEquivalence | Suite::Refinement
        )
    });
    if !uses_noise {
        return None;
    }
    let mut region = 0.0f64;
    if cfg.suites.contains(&Suite::McVariance) {
        for (_, x) in cfg.mc_points() {
            region = region.max(x.abs());
        }
    }
    if cfg.suites.contains(&Suite::WeakEquivalence) || cfg.suites.contains(&Suite::Refinement) {
        for phi in &cfg.test_functions {
            let (lo, hi) = phi.space_support();
            region = region.max(lo.abs()).max(hi.abs());
        }
    }
    let length = (cfg.coefficients.max_diffusivity() * cfg.grid.horizon()).sqrt();
    let needed = region + cfg.tolerances.margin_lengths * length;
    (cfg.grid.half_width() < needed).then(|| {
        format!(
            "L = {} is below {needed} (evaluation region {region} plus {} diffusion lengths); \
             truncated noise may bias results",
            cfg.grid.half_width(),
            cfg.tolerances.margin_lengths
        )
    })
}

struct SuiteOutput {
    records: Vec<Record>,
    files: Vec<(String, String)>,
}

fn scan_spec(cfg: &RunConfig, count: usize) -> SampleSpec {
    SampleSpec {
        count,
        seed: cfg.scan.seed,
        ..SampleSpec::default()
    }
}

fn kernel_checks(cfg: &RunConfig, exec: Execution) -> Result<SuiteOutput, CliError> {
    const SUITE: &str = "kernel-checks";
    let tol = &cfg.tolerances;
    let c = &cfg.coefficients;
    let spec = scan_spec(cfg, cfg.scan.samples);

    // Gaussian reduction uses the left-hand medium on both sides.
    let homogeneous = Coefficients::homogeneous(c.a1(), c.rho1())?;
    let points = sample_points(Identity::RhoSymmetry, &spec, tol.exclusion_radius);
    let gaps = exec.try_map_range(points.len(), |i| {
        let p = points[i];
        gaussian_gap(p.t, p.x, p.y, &homogeneous)
    })?;
    let (worst, gap) =
        gaps.iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, g)| if g > acc.1 { (i, g) } else { acc },
            );
    let wp = points[worst];

    let flux = scan_identity(Identity::FluxJump, &spec, c, tol, exec)?;
    let symmetry = scan_identity(Identity::RhoSymmetry, &spec, c, tol, exec)?;

    let mut csv = String::new();
    let _ = writeln!(csv, "{}", IdentityReport::CSV_HEADER);
    let _ = writeln!(
        csv,
        "gaussian_reduction,{},{},{},{},{},{}",
        fmt_f64(gap),
        points.len(),
        fmt_f64(wp.t),
        fmt_f64(wp.x),
        fmt_f64(wp.y),
        spec.seed
    );
    let _ = writeln!(csv, "{}", flux.csv_row());
    let _ = writeln!(csv, "{}", symmetry.csv_row());

    Ok(SuiteOutput {
        records: vec![
            Record::at_most(SUITE, "gaussian_reduction", gap, tol.gaussian_rel),
            Record::below(SUITE, "flux_jump", flux.max_abs_error, tol.flux_abs),
            Record::below(
                SUITE,
                "rho_symmetry",
                symmetry.max_abs_error,
                tol.symmetry_rel,
            ),
        ],
        files: vec![("kernel_checks.csv".into(), csv)],
    })
}

fn identity_scan(cfg: &RunConfig, exec: Execution) -> Result<SuiteOutput, CliError> {
    const SUITE: &str = "identity-scan";
    let tol = &cfg.tolerances;
    let c = &cfg.coefficients;
    let spec = scan_spec(cfg, cfg.scan.identity_samples);

    let pde = pde_convergence(&spec, &PDE_STEPS, c, tol, exec)?;
    let order = pde
        .observed_order
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let semigroup = scan_identity(Identity::Semigroup, &spec, c, tol, exec)?;
    let normalization = scan_identity(Identity::Normalization, &spec, c, tol, exec)?;

    let mut csv = String::new();
    let _ = writeln!(csv, "{}", IdentityReport::CSV_HEADER);
    let _ = writeln!(csv, "{}", semigroup.csv_row());
    let _ = writeln!(csv, "{}", normalization.csv_row());

    let mut pde_csv = String::from("h_x,h_t,max_abs_residual,observed_order,median_point_order\n");
    for (k, h) in pde.steps.iter().enumerate() {
        let (o, m) = if k == 0 {
            (String::new(), String::new())
        } else {
            (
                fmt_f64(pde.observed_order[k - 1]),
                fmt_f64(pde.median_point_order[k - 1]),
            )
        };
        let _ = writeln!(
            pde_csv,
            "{},{},{},{o},{m}",
            fmt_f64(*h),
            fmt_f64(h * h),
            fmt_f64(pde.max_residual[k])
        );
    }

    Ok(SuiteOutput {
        records: vec![
            Record::at_least(SUITE, "pde_residual_order", order, tol.pde_min_order),
            Record::below(
                SUITE,
                "semigroup",
                semigroup.max_abs_error,
                tol.semigroup_abs,
            ),
            Record::below(
                SUITE,
                "normalization",
                normalization.max_abs_error,
                tol.normalization_abs,
            ),
        ],
        files: vec![
            ("identity_scan.csv".into(), csv),
            ("pde_convergence.csv".into(), pde_csv),
        ],
    })
}

/// Isometry reference: closed form when homogeneous, quadrature otherwise.
/// Returns `(reference, allowed standard errors)`.
fn variance_reference(cfg: &RunConfig, t: f64, x: f64) -> Result<(f64, f64), CliError> {
    let c = &cfg.coefficients;
    let tol = &cfg.tolerances;
    if c.is_homogeneous() {
        Ok((
            (t / (std::f64::consts::PI * c.a1())).sqrt(),
            tol.mc_sigmas_analytic,
        ))
    } else {
        Ok((
            variance_quadrature(t, x, c, &tol.quadrature)?,
            tol.mc_sigmas_quadrature,
        ))
    }
}

fn mc_variance(cfg: &RunConfig, exec: Execution) -> Result<SuiteOutput, CliError> {
    const SUITE: &str = "mc-variance";
    let tol = &cfg.tolerances;
    let points = cfg.mc_points();
    let seed = cfg.seeds[0];
    let samples = monte_carlo(
        &cfg.grid,
        &cfg.coefficients,
        &points,
        seed,
        cfg.mc.replicates,
        exec,
    )?;

    let mut records = Vec::new();
    let mut csv = String::from(
        "t,x,replicates,sample_variance,standard_error,reference,z,skewness,excess_kurtosis\n",
    );
    for (p, &(t, x)) in points.iter().enumerate() {
        let values: Vec<f64> = samples.iter().map(|s| s.values[p]).collect();
        let m = SampleMoments::from_values(&values)?;
        let (reference, sigmas) = variance_reference(cfg, t, x)?;
        let se = m.variance_se();
        let z = (m.variance - reference) / se;
        let n = m.count as f64;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(t),
            fmt_f64(x),
            m.count,
            fmt_f64(m.variance),
            fmt_f64(se),
            fmt_f64(reference),
            fmt_f64(z),
            fmt_f64(m.skewness),
            fmt_f64(m.excess_kurtosis)
        );
        let at = format!("(t={t},x={x})");
        records.push(Record::at_most(
            SUITE,
            format!("variance_z{at}"),
            z.abs(),
            sigmas,
        ));
        records.push(Record::below(
            SUITE,
            format!("skewness_z{at}"),
            m.skewness.abs() / (6.0 / n).sqrt(),
            tol.normality_sigmas,
        ));
        records.push(Record::below(
            SUITE,
            format!("excess_kurtosis_z{at}"),
            m.excess_kurtosis.abs() / (24.0 / n).sqrt(),
            tol.normality_sigmas,
        ));
    }

    let mut field_csv = String::from(FieldSample::CSV_HEADER);
    field_csv.push('\n');
    let mut buf = Vec::new();
    for s in &samples {
        s.write_csv_rows(&mut buf).expect("writes to a Vec");
    }
    field_csv.push_str(std::str::from_utf8(&buf).expect("ascii"));

    Ok(SuiteOutput {
        records,
        files: vec![
            ("mc_variance.csv".into(), csv),
            ("mc_samples.csv".into(), field_csv),
        ],
    })
}

fn weak_equivalence(cfg: &RunConfig, exec: Execution) -> Result<SuiteOutput, CliError> {
    const SUITE: &str = "weak-equivalence";
    let tol = &cfg.tolerances;
    let c = &cfg.coefficients;
    let noises: Vec<NoiseField> = cfg
        .seeds
        .iter()
        .map(|&s| NoiseField::sample(&cfg.grid, s, 0, exec))
        .collect();

    let mut records = Vec::new();
    let mut csv = format!("phi,{}\n", RefinementTable::CSV_HEADER);
    let mut max_interface = 0.0f64;
    for (i, phi) in cfg.test_functions.iter().enumerate() {
        let reports = equivalence_residuals(&noises, phi, c, exec)?;
        let mut rel: Vec<f64> = reports.iter().map(|r| r.relative_residual()).collect();
        for r in &reports {
            max_interface = max_interface.max(r.rhs_interface.abs());
            let _ = writeln!(
                csv,
                "{i},{},{},{},{},{},{},{},{}",
                r.seed,
                r.grid.n_t(),
                r.grid.n_x(),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs_noise),
                fmt_f64(r.rhs_interface),
                fmt_f64(r.residual),
                fmt_f64(r.field_rms)
            );
        }
        let med = crate::detcheck::median(&mut rel);
        records.push(Record::below(
            SUITE,
            format!("median_relative_residual[phi{i}]"),
            med,
            tol.weak_rel_max,
        ));
    }
    if c.flux_jump_weight() == 0.0 {
        records.push(Record::at_most(
            SUITE,
            "interface_term_zero",
            max_interface,
            0.0,
        ));
    }
    Ok(SuiteOutput {
        records,
        files: vec![("weak_equivalence.csv".into(), csv)],
    })
}

fn refinement(cfg: &RunConfig, exec: Execution) -> Result<SuiteOutput, CliError> {
    const SUITE: &str = "refinement";
    let tol = &cfg.tolerances;
    let phi = &cfg.test_functions[0];
    let table = refinement_study(phi, &cfg.coefficients, &cfg.seeds, &cfg.ladder(), exec)?;
    let medians = table.level_medians();
    let finest = medians[medians.len() - 1];

    let mut records = vec![
        Record::at_most(SUITE, "median_inversions", table.inversions() as f64, 1.0),
        Record::below(
            SUITE,
            "finest_median_relative_residual",
            finest,
            tol.weak_rel_max,
        ),
    ];
    if medians.len() > 1 {
        records.push(Record::below(
            SUITE,
            "finest_over_coarsest_median",
            finest / medians[0],
            1.0,
        ));
    }
    if cfg.coefficients.flux_jump_weight() == 0.0 {
        let m = table
            .rows
            .iter()
            .map(|r| r.rhs_interface.abs())
            .fold(0.0, f64::max);
        records.push(Record::at_most(SUITE, "interface_term_zero", m, 0.0));
    }
    let mut buf = Vec::new();
    table.write_csv(&mut buf).expect("writes to a Vec");
    Ok(SuiteOutput {
        records,
        files: vec![(
            "refinement.csv".into(),
            String::from_utf8(buf).expect("ascii"),
        )],
    })
}
