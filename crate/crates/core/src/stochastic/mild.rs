use std::io::{self, Write};
use std::ops::Range;

use super::{NoiseField, SpaceTimeGrid};
use crate::cli::output::fmt_f64;
use crate::error::{Error, Result};
use crate::kernel::Coefficients;
use crate::par::{dot, Execution};

/// Identifies the noise realization a sample was computed from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseRef {
    pub grid: SpaceTimeGrid,
    pub seed: u64,
    pub replicate: u64,
}

impl NoiseRef {
    fn of(noise: &NoiseField) -> Self {
        Self {
            grid: *noise.grid(),
            seed: noise.seed(),
            replicate: noise.replicate(),
        }
    }
}

/// Values of the mild solution at a list of `(t, x)` points.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub eval_points: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    pub noise_ref: NoiseRef,
}

impl FieldSample {
    pub const CSV_HEADER: &'static str = "replicate,t,x,value";

    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (&(t, x), v) in self.eval_points.iter().zip(&self.values) {
            writeln!(
                out,
                "{},{},{},{}",
                self.noise_ref.replicate,
                fmt_f64(t),
                fmt_f64(x),
                fmt_f64(*v)
            )?;
        }
        Ok(())
    }
}

fn check_points(grid: &SpaceTimeGrid, points: &[(f64, f64)]) -> Result<()> {
    for &(t, x) in points {
        if !(t > 0.0 && t <= grid.horizon() && x.is_finite()) {
            return Err(Error::EvalPointOutside { t, x });
        }
    }
    Ok(())
}

/// `G(t - s_i, x, y_j)` for every `j` into `buf`.
#[inline]
fn kernel_row(grid: &SpaceTimeGrid, c: &Coefficients, lag: f64, x: f64, buf: &mut [f64]) {
    for (j, b) in buf.iter_mut().enumerate() {
        *b = c.g(lag, x, grid.space_center(j));
    }
}

/// `u(t, x) ≈ Σ_{s_i < t} Σ_j G(t - s_i, x, y_j) ΔW_ij`, one point per task.
pub fn mild_field(
    grid: &SpaceTimeGrid,
    noise: &NoiseField,
    c: &Coefficients,
    eval_points: &[(f64, f64)],
    exec: Execution,
) -> Result<FieldSample> {
    if noise.grid() != grid {
        return Err(Error::GridMismatch);
    }
    check_points(grid, eval_points)?;
    let values = exec.map_slice(eval_points, |&(t, x)| {
        let mut buf = vec![0.0; grid.n_x()];
        let mut acc = 0.0;
        for i in 0..grid.rows_before(t) {
            kernel_row(grid, c, t - grid.time_center(i), x, &mut buf);
            acc += dot(&buf, noise.row(i));
        }
        acc
    });
    Ok(FieldSample {
        eval_points: eval_points.to_vec(),
        values,
        noise_ref: NoiseRef::of(noise),
    })
}

/// Kernel weights of [`mild_field`] for fixed points, reusable across
/// noise realizations on the same grid.
#[derive(Clone, Debug)]
pub struct MildWeights {
    grid: SpaceTimeGrid,
    points: Vec<(f64, f64)>,
    weights: Vec<Vec<f64>>,
}

pub fn mild_weights(
    grid: &SpaceTimeGrid,
    c: &Coefficients,
    eval_points: &[(f64, f64)],
    exec: Execution,
) -> Result<MildWeights> {
    check_points(grid, eval_points)?;
    let weights = exec.map_slice(eval_points, |&(t, x)| {
        let n_x = grid.n_x();
        let rows = grid.rows_before(t);
        let mut w = vec![0.0; rows * n_x];
        for i in 0..rows {
            kernel_row(
                grid,
                c,
                t - grid.time_center(i),
                x,
                &mut w[i * n_x..(i + 1) * n_x],
            );
        }
        w
    });
    Ok(MildWeights {
        grid: *grid,
        points: eval_points.to_vec(),
        weights,
    })
}

impl MildWeights {
    /// Same bits as [`mild_field`] on the same noise.
    pub fn apply(&self, noise: &NoiseField) -> Result<FieldSample> {
        if noise.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let n_x = self.grid.n_x();
        let values = self
            .weights
            .iter()
            .map(|w| {
                w.chunks_exact(n_x)
                    .enumerate()
                    .fold(0.0, |acc, (i, row)| acc + dot(row, noise.row(i)))
            })
            .collect();
        Ok(FieldSample {
            eval_points: self.points.clone(),
            values,
            noise_ref: NoiseRef::of(noise),
        })
    }
}

/// Independent replicates `0..replicates` of the field at `eval_points`,
/// parallel over replicates.
pub fn monte_carlo(
    grid: &SpaceTimeGrid,
    c: &Coefficients,
    eval_points: &[(f64, f64)],
    seed: u64,
    replicates: usize,
    exec: Execution,
) -> Result<Vec<FieldSample>> {
    let weights = mild_weights(grid, c, eval_points, exec)?;
    exec.try_map_range(replicates, |r| {
        let noise = NoiseField::sample(grid, seed, r as u64, Execution::Sequential);
        weights.apply(&noise)
    })
}

/// Mild field at the cell-centre times `s_k`, `k ∈ rows`, and the given
/// abscissae, for several noise realizations on one grid.
///
/// Since `s_k - s_i = (k - i) dt`, the kernel only depends on the lag, so one
/// table `G(m dt, x, y_j)` per abscissa serves every row and every noise.
/// Returns one row-major `rows.len() × xs.len()` array per noise.
pub fn mild_field_on_cells(
    grid: &SpaceTimeGrid,
    noises: &[NoiseField],
    c: &Coefficients,
    xs: &[f64],
    rows: Range<usize>,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    if noises.iter().any(|w| w.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    if rows.end > grid.n_t() || rows.start > rows.end {
        return Err(Error::Precondition(format!(
            "row range {rows:?} outside 0..{}",
            grid.n_t()
        )));
    }
    if let Some(&x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::EvalPointOutside {
            t: grid.horizon(),
            x,
        });
    }
    let n_x = grid.n_x();
    let dt = grid.dt();
    let columns = exec.map_slice(xs, |&x| {
        let max_lag = rows.end.saturating_sub(1);
        let mut table = vec![0.0; max_lag * n_x];
        for m in 1..=max_lag {
            kernel_row(
                grid,
                c,
                m as f64 * dt,
                x,
                &mut table[(m - 1) * n_x..m * n_x],
            );
        }
        noises
            .iter()
            .map(|w| {
                rows.clone()
                    .map(|k| {
                        (0..k).fold(0.0, |acc, i| {
                            let m = k - i;
                            acc + dot(&table[(m - 1) * n_x..m * n_x], w.row(i))
                        })
                    })
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>()
    });
    let n_rows = rows.len();
    Ok((0..noises.len())
        .map(|n| {
            let mut out = vec![0.0; n_rows * xs.len()];
            for (p, col) in columns.iter().enumerate() {
                for (r, v) in col[n].iter().enumerate() {
                    out[r * xs.len() + p] = *v;
                }
            }
            out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SpaceTimeGrid, Coefficients, NoiseField) {
        let g = SpaceTimeGrid::new(1.0, 4.0, 16, 24).unwrap();
        let c = Coefficients::new(1.0, 2.0, 1.0, 3.0).unwrap();
        let w = NoiseField::sample(&g, 42, 0, Execution::Sequential);
        (g, c, w)
    }

    #[test]
    fn zero_noise_gives_zero_field() {
        let (g, c, _) = setup();
        let u = mild_field(
            &g,
            &NoiseField::zeros(&g),
            &c,
            &[(0.5, 0.1), (1.0, -2.0)],
            Execution::default(),
        )
        .unwrap();
        assert_eq!(u.values, vec![0.0, 0.0]);
    }

    #[test]
    fn before_first_midpoint_is_empty() {
        let (g, c, w) = setup();
        let u = mild_field(
            &g,
            &w,
            &c,
            &[(0.5 * g.dt(), 0.3), (0.01, 0.0)],
            Execution::default(),
        )
        .unwrap();
        assert_eq!(u.values, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_points_and_grids() {
        let (g, c, w) = setup();
        for p in [(0.0, 0.0), (1.5, 0.0), (-0.1, 0.0), (0.5, f64::NAN)] {
            assert!(matches!(
                mild_field(&g, &w, &c, &[p], Execution::default()),
                Err(Error::EvalPointOutside { .. })
            ));
        }
        let other = SpaceTimeGrid::new(1.0, 4.0, 8, 24).unwrap();
        assert!(matches!(
            mild_field(&other, &w, &c, &[(0.5, 0.0)], Execution::default()),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn linear_in_noise() {
        let (g, c, w) = setup();
        let pts = [(0.7, 0.0), (1.0, 0.4), (0.3, -1.1)];
        let u = mild_field(&g, &w, &c, &pts, Execution::default()).unwrap();
        let u2 = mild_field(&g, &w.scaled(2.0), &c, &pts, Execution::default()).unwrap();
        for (a, b) in u.values.iter().zip(&u2.values) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn weights_reproduce_direct_sum() {
        let (g, c, w) = setup();
        let pts = [(0.7, 0.0), (1.0, 0.4), (0.3, -1.1)];
        let direct = mild_field(&g, &w, &c, &pts, Execution::Parallel).unwrap();
        let seq = mild_field(&g, &w, &c, &pts, Execution::Sequential).unwrap();
        let weighted = mild_weights(&g, &c, &pts, Execution::default())
            .unwrap()
            .apply(&w)
            .unwrap();
        assert_eq!(direct, seq);
        assert_eq!(direct, weighted);
    }

    #[test]
    fn lag_table_matches_direct_sum() {
        let (g, c, w) = setup();
        let w2 = NoiseField::sample(&g, 43, 0, Execution::Sequential);
        let xs = [g.space_center(3), 0.0, g.space_center(13)];
        let rows = 2..14;
        let out = mild_field_on_cells(
            &g,
            &[w.clone(), w2.clone()],
            &c,
            &xs,
            rows.clone(),
            Execution::default(),
        )
        .unwrap();
        for (n, noise) in [w, w2].iter().enumerate() {
            for (r, k) in rows.clone().enumerate() {
                for (p, &x) in xs.iter().enumerate() {
                    let direct = mild_field(
                        &g,
                        noise,
                        &c,
                        &[(g.time_center(k), x)],
                        Execution::Sequential,
                    )
                    .unwrap()
                    .values[0];
                    let table = out[n][r * xs.len() + p];
                    assert!(
                        (table - direct).abs() <= 1e-12 * direct.abs().max(1e-3),
                        "{table} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn monte_carlo_is_schedule_independent() {
        let (g, c, _) = setup();
        let pts = [(1.0, 0.0)];
        let a = monte_carlo(&g, &c, &pts, 7, 20, Execution::Parallel).unwrap();
        let b = monte_carlo(&g, &c, &pts, 7, 20, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[3].noise_ref.replicate, 3);
        let direct = mild_field(
            &g,
            &NoiseField::sample(&g, 7, 3, Execution::Sequential),
            &c,
            &pts,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(a[3], direct);
    }

    #[test]
    fn csv_rows() {
        let (g, c, w) = setup();
        let u = mild_field(&g, &w, &c, &[(0.01, 0.5)], Execution::default()).unwrap();
        let mut out = Vec::new();
        u.write_csv_rows(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "0,1.0000000000000000e-2,5.0000000000000000e-1,0.0000000000000000e0\n"
        );
    }
}
