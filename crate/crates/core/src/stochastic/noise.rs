use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::SpaceTimeGrid;
use crate::error::{Error, Result};
use crate::par::Execution;

/// Cell increments `ΔW_ij`, independent `N(0, dt·dx)`, stored row-major
/// (`n_t` rows of `n_x` cells).
///
/// Every increment is a pure function of `(seed, replicate, cell)`: the
/// ChaCha stream is selected by the replicate index and the block position
/// by the cell index, so rows can be filled in any order.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseField {
    grid: SpaceTimeGrid,
    seed: u64,
    replicate: u64,
    increments: Vec<f64>,
}

/// `NoiseField::sample(grid, seed, 0)` on the default executor.
pub fn sample_noise(grid: &SpaceTimeGrid, seed: u64) -> NoiseField {
    NoiseField::sample(grid, seed, 0, Execution::default())
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

impl NoiseField {
    pub fn sample(grid: &SpaceTimeGrid, seed: u64, replicate: u64, exec: Execution) -> Self {
        let n_x = grid.n_x();
        let scale = (grid.dt() * grid.dx()).sqrt();
        let mut increments = vec![0.0; grid.cells()];
        exec.for_each_chunk_mut(&mut increments, n_x, |i, row| {
            fill_row(seed, replicate, i, scale, row);
        });
        Self {
            grid: *grid,
            seed,
            replicate,
            increments,
        }
    }

    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self {
            grid: *grid,
            seed: 0,
            replicate: 0,
            increments: vec![0.0; grid.cells()],
        }
    }

    /// Wraps explicit increments; used for tests and externally generated
    /// noise.
    pub fn from_increments(grid: &SpaceTimeGrid, seed: u64, increments: Vec<f64>) -> Result<Self> {
        if increments.len() != grid.cells() {
            return Err(Error::InvalidGrid(format!(
                "expected {} increments, got {}",
                grid.cells(),
                increments.len()
            )));
        }
        Ok(Self {
            grid: *grid,
            seed,
            replicate: 0,
            increments,
        })
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn replicate(&self) -> u64 {
        self.replicate
    }
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.n_x();
        &self.increments[i * n..(i + 1) * n]
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            increments: self.increments.iter().map(|w| lambda * w).collect(),
            ..self.clone()
        }
    }

    /// Sums `factor_t × factor_x` blocks of child cells into parent cells.
    pub fn coarsen(&self, factor_t: usize, factor_x: usize) -> Result<Self> {
        let coarse = self.grid.coarsen(factor_t, factor_x)?;
        let (nt, nx) = (coarse.n_t(), coarse.n_x());
        let fine_nx = self.grid.n_x();
        let mut increments = vec![0.0; coarse.cells()];
        for i in 0..nt {
            for j in 0..nx {
                let mut s = 0.0;
                for di in 0..factor_t {
                    let row = (i * factor_t + di) * fine_nx;
                    for dj in 0..factor_x {
                        s += self.increments[row + j * factor_x + dj];
                    }
                }
                increments[i * nx + j] = s;
            }
        }
        Ok(Self {
            grid: coarse,
            seed: self.seed,
            replicate: self.replicate,
            increments,
        })
    }

    /// Coarsens onto `target`, which must share the domain and divide both
    /// cell counts.
    pub fn coarsen_to(&self, target: &SpaceTimeGrid) -> Result<Self> {
        if !self.grid.same_domain(target)
            || target.n_t() == 0
            || !self.grid.n_t().is_multiple_of(target.n_t())
            || !self.grid.n_x().is_multiple_of(target.n_x())
        {
            return Err(Error::NonNestedLadder(format!(
                "{}x{} does not refine {}x{}",
                self.grid.n_t(),
                self.grid.n_x(),
                target.n_t(),
                target.n_x()
            )));
        }
        self.coarsen(
            self.grid.n_t() / target.n_t(),
            self.grid.n_x() / target.n_x(),
        )
    }
}

/// Box–Muller over pairs of cells; each pair consumes two `u64` (four
/// 32-bit words) at a position fixed by its cell index.
fn fill_row(seed: u64, replicate: u64, i: usize, scale: f64, row: &mut [f64]) {
    let n_x = row.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng.set_word_pos(2 * (i as u128) * (n_x as u128));
    for pair in row.chunks_exact_mut(2) {
        let u1 = ((rng.next_u64() >> 11) + 1) as f64 * TWO_POW_M53;
        let u2 = (rng.next_u64() >> 11) as f64 * TWO_POW_M53;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        pair[0] = scale * r * c;
        pair[1] = scale * r * s;
    }
}
