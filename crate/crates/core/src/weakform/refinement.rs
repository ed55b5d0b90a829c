use std::io::{self, Write};

use super::{equivalence_residuals, TestFunction, WeakResidualReport};
use crate::cli::output::fmt_f64;
use crate::detcheck::median;
use crate::error::{Error, Result};
use crate::kernel::Coefficients;
use crate::par::Execution;
use crate::stochastic::{NoiseField, SpaceTimeGrid};

/// One report per `(level, seed)`, levels outermost, coarsest first.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementTable {
    pub ladder: Vec<SpaceTimeGrid>,
    pub seeds: Vec<u64>,
    pub rows: Vec<WeakResidualReport>,
}

impl RefinementTable {
    pub const CSV_HEADER: &'static str =
        "seed,n_t,n_x,lhs,rhs_noise,rhs_interface,residual,field_rms";

    pub fn level(&self, l: usize) -> &[WeakResidualReport] {
        let n = self.seeds.len();
        &self.rows[l * n..(l + 1) * n]
    }

    /// Median relative residual of each level.
    pub fn level_medians(&self) -> Vec<f64> {
        (0..self.ladder.len())
            .map(|l| {
                let mut r: Vec<f64> = self
                    .level(l)
                    .iter()
                    .map(|r| r.relative_residual())
                    .collect();
                median(&mut r)
            })
            .collect()
    }

    /// Number of levels whose median does not drop below the previous one.
    pub fn inversions(&self) -> usize {
        self.level_medians()
            .windows(2)
            .filter(|w| w[1] >= w[0])
            .count()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.seed,
                r.grid.n_t(),
                r.grid.n_x(),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs_noise),
                fmt_f64(r.rhs_interface),
                fmt_f64(r.residual),
                fmt_f64(r.field_rms)
            )?;
        }
        Ok(())
    }
}

fn check_ladder(ladder: &[SpaceTimeGrid]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::NonNestedLadder("ladder is empty".into()));
    }
    let dyadic = |fine: usize, coarse: usize| {
        fine > coarse && fine.is_multiple_of(coarse) && (fine / coarse).is_power_of_two()
    };
    for w in ladder.windows(2) {
        let (c, f) = (&w[0], &w[1]);
        if !c.same_domain(f) || !dyadic(f.n_t(), c.n_t()) || !dyadic(f.n_x(), c.n_x()) {
            return Err(Error::NonNestedLadder(format!(
                "{}x{} on [0,{}]x[-{},{}] does not refine {}x{} on [0,{}]x[-{},{}]",
                f.n_t(),
                f.n_x(),
                f.horizon(),
                f.half_width(),
                f.half_width(),
                c.n_t(),
                c.n_x(),
                c.horizon(),
                c.half_width(),
                c.half_width()
            )));
        }
    }
    Ok(())
}

/// Residuals on every level of a dyadic ladder (coarsest first) with noise
/// sampled once on the finest level and summed onto the coarser ones.
pub fn refinement_study(
    phi: &TestFunction,
    c: &Coefficients,
    seeds: &[u64],
    ladder: &[SpaceTimeGrid],
    exec: Execution,
) -> Result<RefinementTable> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    check_ladder(ladder)?;
    let finest = ladder[ladder.len() - 1];
    let fine: Vec<NoiseField> = seeds
        .iter()
        .map(|&s| NoiseField::sample(&finest, s, 0, exec))
        .collect();
    let mut rows = Vec::with_capacity(seeds.len() * ladder.len());
    for level in ladder {
        let noises = fine
            .iter()
            .map(|w| w.coarsen_to(level))
            .collect::<Result<Vec<_>>>()?;
        rows.extend(equivalence_residuals(&noises, phi, c, exec)?);
    }
    Ok(RefinementTable {
        ladder: ladder.to_vec(),
        seeds: seeds.to_vec(),
        rows,
    })
}
