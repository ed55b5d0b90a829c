//! Interface heat kernel and the stochastic heat equation it drives.
//!
//! The operator is `L = (1 / 2ρ) d/dx (ρ A d/dx)` with `A` and `ρ` constant on
//! each half-line and a single jump at `x = 0`. The crate provides
//!
//! * [`kernel`]: the closed-form fundamental solution `G(t, x, y)`, its spatial
//!   derivative and the semigroup action by quadrature,
//! * [`detcheck`]: deterministic identity checks on `G` (interface flux,
//!   PDE residual, semigroup, unit mass, ρ-symmetry),
//! * [`stochastic`]: seeded space–time white noise and the mild solution,
//!   plus its second moments by quadrature,
//! * [`weakform`]: both sides of the weak formulation assembled on a common
//!   noise realization, and refinement studies of the residual,
//! * [`cli`]: configuration loading and the suite runner behind the
//!   `skewheat` binary.
//!
//! Batch work runs on rayon when the `parallel` feature is enabled (the
//! default). Every result depends only on inputs and seeds, never on the
//! number of worker threads.

// Range checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detcheck;
pub mod error;
pub mod kernel;
pub mod par;
pub mod quadrature;
pub mod stochastic;
pub mod tolerances;
pub mod weakform;

pub use error::{Error, Result};
pub use kernel::{Coefficients, Side};
pub use par::Execution;
pub use quadrature::QuadratureSpec;
pub use tolerances::Tolerances;
