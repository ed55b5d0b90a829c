use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cells on `[0, T] × [-L, L]`.
///
/// Cell centres are `s_i = (i + ½) dt` and `y_j = -L + (j + ½) dx`. `n_x` is
/// even, so no centre sits on the interface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridValues", into = "GridValues")]
pub struct SpaceTimeGrid {
    horizon: f64,
    half_width: f64,
    n_t: usize,
    n_x: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridValues {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n_t: usize,
    pub n_x: usize,
}

impl TryFrom<GridValues> for SpaceTimeGrid {
    type Error = Error;
    fn try_from(v: GridValues) -> Result<Self> {
        SpaceTimeGrid::new(v.horizon, v.half_width, v.n_t, v.n_x)
    }
}

impl From<SpaceTimeGrid> for GridValues {
    fn from(g: SpaceTimeGrid) -> Self {
        GridValues {
            horizon: g.horizon,
            half_width: g.half_width,
            n_t: g.n_t,
            n_x: g.n_x,
        }
    }
}

impl SpaceTimeGrid {
    pub fn new(horizon: f64, half_width: f64, n_t: usize, n_x: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "T must be positive, got {horizon}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "L must be positive, got {half_width}"
            )));
        }
        if n_t == 0 {
            return Err(Error::InvalidGrid("n_t must be at least 1".into()));
        }
        if n_x == 0 || !n_x.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_x must be even and positive, got {n_x}"
            )));
        }
        Ok(Self {
            horizon,
            half_width,
            n_t,
            n_x,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn cells(&self) -> usize {
        self.n_t * self.n_x
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_t as f64
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n_x as f64
    }

    /// `s_i`
    #[inline]
    pub fn time_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dt()
    }

    /// `y_j`
    #[inline]
    pub fn space_center(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 0.5) * self.dx()
    }

    pub fn space_centers(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| self.space_center(j)).collect()
    }

    /// Number of time cells whose centre lies strictly before `t`.
    pub fn rows_before(&self, t: f64) -> usize {
        // s_i < t  <=>  i < t/dt - 1/2
        let mut k = ((t / self.dt() - 0.5).ceil().max(0.0) as usize).min(self.n_t);
        while k > 0 && self.time_center(k - 1) >= t {
            k -= 1;
        }
        while k < self.n_t && self.time_center(k) < t {
            k += 1;
        }
        k
    }

    /// Grid with `factor_t` and `factor_x` times fewer cells per axis.
    pub fn coarsen(&self, factor_t: usize, factor_x: usize) -> Result<Self> {
        if factor_t == 0
            || factor_x == 0
            || !self.n_t.is_multiple_of(factor_t)
            || !self.n_x.is_multiple_of(factor_x)
        {
            return Err(Error::InvalidGrid(format!(
                "cannot coarsen {}x{} by {factor_t}x{factor_x}",
                self.n_t, self.n_x
            )));
        }
        Self::new(
            self.horizon,
            self.half_width,
            self.n_t / factor_t,
            self.n_x / factor_x,
        )
    }

    /// Same domain, both axes identical.
    pub fn same_domain(&self, other: &Self) -> bool {
        self.horizon == other.horizon && self.half_width == other.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(SpaceTimeGrid::new(0.0, 1.0, 4, 4).is_err());
        assert!(SpaceTimeGrid::new(1.0, -1.0, 4, 4).is_err());
        assert!(SpaceTimeGrid::new(1.0, 1.0, 0, 4).is_err());
        assert!(SpaceTimeGrid::new(1.0, 1.0, 4, 5).is_err());
    }

    #[test]
    fn centers_avoid_interface() {
        let g = SpaceTimeGrid::new(1.0, 3.0, 8, 6).unwrap();
        assert_eq!(g.dt(), 0.125);
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.space_centers(), vec![-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]);
        assert_eq!(g.time_center(0), 0.0625);
    }

    #[test]
    fn rows_before_is_strict() {
        let g = SpaceTimeGrid::new(1.0, 1.0, 10, 2).unwrap();
        assert_eq!(g.rows_before(0.01), 0);
        assert_eq!(g.rows_before(0.05), 0);
        assert_eq!(g.rows_before(0.0500001), 1);
        assert_eq!(g.rows_before(0.15), 1);
        assert_eq!(g.rows_before(1.0), 10);
        for k in 0..10 {
            assert_eq!(g.rows_before(g.time_center(k)), k);
        }
    }

    #[test]
    fn coarsen_checks_divisibility() {
        let g = SpaceTimeGrid::new(1.0, 1.0, 8, 8).unwrap();
        let c = g.coarsen(2, 4).unwrap();
        assert_eq!((c.n_t(), c.n_x()), (4, 2));
        assert!(g.coarsen(3, 2).is_err());
        assert!(g.coarsen(1, 8).is_err()); // n_x = 1 is odd
    }

    #[test]
    fn serde_uses_short_names() {
        let g: SpaceTimeGrid =
            serde_json::from_str(r#"{"T":1.0,"L":8.0,"n_t":16,"n_x":32}"#).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert!(
            serde_json::from_str::<SpaceTimeGrid>(r#"{"T":1.0,"L":8.0,"n_t":16,"n_x":31}"#)
                .is_err()
        );
    }
}
