//! Space–time white noise on a uniform grid and the mild solution
//! `u(t, x) = ∫₀ᵗ ∫ G(t - s, x, y) W(ds, dy)`.

mod grid;
mod mild;
mod moments;
mod noise;

pub use grid::SpaceTimeGrid;
pub use mild::{mild_field, mild_field_on_cells, mild_weights, monte_carlo, FieldSample, NoiseRef};
pub use moments::{covariance_quadrature, variance_quadrature, SampleMoments};
pub use noise::{sample_noise, NoiseField};
