//! Both sides of the weak-solution identity
//!
//! ```text
//! -∬ u (∂ₛφ + Lφ) ρ dx ds = ∬ φ ρ W(ds, dx) + ½ (ρ₂a₂ - ρ₁a₁) ∫ u(s, 0) ∂ₓφ(s, 0) ds
//! ```
//!
//! assembled on one noise realization with `u` from the mild formula, and the
//! refinement experiment showing the residual vanish.

mod assemble;
mod refinement;
mod test_function;

pub use assemble::{
    equivalence_residual, equivalence_residuals, weak_lhs, weak_rhs, NodeField, WeakResidualReport,
};
pub use refinement::{refinement_study, RefinementTable};
pub use test_function::{eval_test_fn, PhiValues, TestFunction};
