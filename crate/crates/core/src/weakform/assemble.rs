use std::ops::Range;

use super::TestFunction;
use crate::error::{Error, Result};
use crate::kernel::Coefficients;
use crate::par::Execution;
use crate::stochastic::{mild_field_on_cells, NoiseField, SpaceTimeGrid};
use crate::tolerances::RMS_FLOOR;

/// Field values on a tensor quadrature grid `times × xs`, row-major, with
/// product weights.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeField {
    times: Vec<f64>,
    time_weights: Vec<f64>,
    xs: Vec<f64>,
    x_weights: Vec<f64>,
    values: Vec<f64>,
}

impl NodeField {
    pub fn new(
        times: Vec<f64>,
        time_weights: Vec<f64>,
        xs: Vec<f64>,
        x_weights: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if times.len() != time_weights.len()
            || xs.len() != x_weights.len()
            || values.len() != times.len() * xs.len()
        {
            return Err(Error::Precondition("node field dimensions disagree".into()));
        }
        if xs.contains(&0.0) {
            return Err(Error::InterfaceNode);
        }
        Ok(Self {
            times,
            time_weights,
            xs,
            x_weights,
            values,
        })
    }

    /// Midpoint rule on the cells `rows × cols` of `grid`.
    pub fn on_cells(
        grid: &SpaceTimeGrid,
        rows: Range<usize>,
        cols: Range<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let times: Vec<f64> = rows.map(|k| grid.time_center(k)).collect();
        let xs: Vec<f64> = cols.map(|j| grid.space_center(j)).collect();
        let time_weights = vec![grid.dt(); times.len()];
        let x_weights = vec![grid.dx(); xs.len()];
        Self::new(times, time_weights, xs, x_weights, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rms(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }
}

/// `-∬ u (∂ₛφ + (A/2) ∂ₓₓφ) ρ dx ds` by the node field's product rule.
pub fn weak_lhs(u: &NodeField, phi: &TestFunction, c: &Coefficients) -> Result<f64> {
    if u.xs.contains(&0.0) {
        return Err(Error::InterfaceNode);
    }
    let n = u.xs.len();
    let mut total = 0.0;
    for (k, (&s, &ws)) in u.times.iter().zip(&u.time_weights).enumerate() {
        let mut row = 0.0;
        for (p, (&x, &wx)) in u.xs.iter().zip(&u.x_weights).enumerate() {
            let d = phi.eval(s, x);
            let op = d.ds + 0.5 * c.diffusivity(x) * d.dxx;
            row += wx * u.values[k * n + p] * op * c.density(x);
        }
        total += ws * row;
    }
    Ok(-total)
}

/// `(Σ φ(s_i, y_j) ρ(y_j) ΔW_ij, ½ (ρ₂a₂ - ρ₁a₁) Σ dt u(s_i, 0) ∂ₓφ(s_i, 0))`.
pub fn weak_rhs<F>(
    noise: &NoiseField,
    phi: &TestFunction,
    u_at_interface: F,
    c: &Coefficients,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let grid = noise.grid();
    let (rows, cols) = support_cells(grid, phi)?;
    let mut rhs_noise = 0.0;
    for i in rows.clone() {
        let s = grid.time_center(i);
        let w = noise.row(i);
        let mut acc = 0.0;
        for j in cols.clone() {
            let y = grid.space_center(j);
            acc += phi.value(s, y) * c.density(y) * w[j];
        }
        rhs_noise += acc;
    }
    let jump = c.flux_jump_weight();
    if jump == 0.0 {
        return Ok((rhs_noise, 0.0));
    }
    let mut acc = 0.0;
    for i in rows {
        let s = grid.time_center(i);
        acc += u_at_interface(s) * phi.eval(s, 0.0).dx;
    }
    Ok((rhs_noise, 0.5 * jump * grid.dt() * acc))
}

/// Cells whose centres lie strictly inside `supp φ`; the support must sit
/// inside `(0, T) × (-L, L)`.
pub(crate) fn support_cells(
    grid: &SpaceTimeGrid,
    phi: &TestFunction,
) -> Result<(Range<usize>, Range<usize>)> {
    phi.validate(grid.horizon())?;
    let (xlo, xhi) = phi.space_support();
    if !(xlo > -grid.half_width() && xhi < grid.half_width()) {
        return Err(Error::InvalidTestFunction(format!(
            "space support [{xlo}, {xhi}] is not inside (-{L}, {L})",
            L = grid.half_width()
        )));
    }
    let (slo, shi) = phi.time_support();
    let rows = open_range(grid.n_t(), |k| grid.time_center(k), slo, shi);
    let cols = open_range(grid.n_x(), |j| grid.space_center(j), xlo, xhi);
    Ok((rows, cols))
}

/// Indices of the increasing nodes that lie in `(lo, hi)`.
fn open_range(n: usize, node: impl Fn(usize) -> f64, lo: f64, hi: f64) -> Range<usize> {
    let start = (0..n).find(|&k| node(k) > lo).unwrap_or(n);
    let end = (start..n).find(|&k| node(k) >= hi).unwrap_or(n);
    start..end
}

/// Both sides of the weak identity on one realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakResidualReport {
    pub lhs: f64,
    pub rhs_noise: f64,
    pub rhs_interface: f64,
    /// `lhs - rhs_noise - rhs_interface`
    pub residual: f64,
    /// RMS of `u` over the nodes inside `supp φ`.
    pub field_rms: f64,
    pub grid: SpaceTimeGrid,
    pub seed: u64,
}

impl WeakResidualReport {
    /// `|residual| / max(field_rms, 1e-12)`
    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / self.field_rms.max(RMS_FLOOR)
    }
}

/// Samples one noise field from `seed` and assembles the identity on it.
pub fn equivalence_residual(
    grid: &SpaceTimeGrid,
    seed: u64,
    phi: &TestFunction,
    c: &Coefficients,
    exec: Execution,
) -> Result<WeakResidualReport> {
    let noise = NoiseField::sample(grid, seed, 0, exec);
    Ok(equivalence_residuals(&[noise], phi, c, exec)?.remove(0))
}

/// Assembles the identity on several realizations of one grid, sharing the
/// kernel tables between them.
pub fn equivalence_residuals(
    noises: &[NoiseField],
    phi: &TestFunction,
    c: &Coefficients,
    exec: Execution,
) -> Result<Vec<WeakResidualReport>> {
    let Some(first) = noises.first() else {
        return Ok(Vec::new());
    };
    let grid = *first.grid();
    let (rows, cols) = support_cells(&grid, phi)?;
    let mut xs: Vec<f64> = cols.clone().map(|j| grid.space_center(j)).collect();
    let interface = c.flux_jump_weight() != 0.0;
    if interface {
        xs.push(0.0);
    }
    let n_cols = xs.len();
    let fields = mild_field_on_cells(&grid, noises, c, &xs, rows.clone(), exec)?;
    let mut reports = Vec::with_capacity(noises.len());
    for (noise, full) in noises.iter().zip(fields) {
        let n_inner = cols.len();
        let mut inner = Vec::with_capacity(rows.len() * n_inner);
        let mut at_zero = Vec::with_capacity(rows.len());
        for r in full.chunks_exact(n_cols.max(1)) {
            inner.extend_from_slice(&r[..n_inner]);
            if interface {
                at_zero.push(r[n_inner]);
            }
        }
        let u = NodeField::on_cells(&grid, rows.clone(), cols.clone(), inner)?;
        let lhs = weak_lhs(&u, phi, c)?;
        let (rhs_noise, rhs_interface) =
            weak_rhs(noise, phi, |s| at_zero[grid.rows_before(s) - rows.start], c)?;
        reports.push(WeakResidualReport {
            lhs,
            rhs_noise,
            rhs_interface,
            residual: lhs - rhs_noise - rhs_interface,
            field_rms: u.rms(),
            grid,
            seed: noise.seed(),
        });
    }
    Ok(reports)
}
