use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient {name} must be strictly positive, got {value}")]
    NonPositiveCoefficient { name: &'static str, value: f64 },

    #[error("beta denominator is not positive ({0}); coefficients are inconsistent")]
    DegenerateBeta(f64),

    #[error("time must be strictly positive, got {0}")]
    NonPositiveTime(f64),

    #[error("dG/dx is discontinuous at x = 0; request a one-sided limit (left or right)")]
    InterfaceDerivative,

    #[error("side {side:?} does not match x = {x}")]
    SideMismatch { x: f64, side: crate::kernel::Side },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    #[error(
        "integrand width {width:e} is below {panels} panels of the finest width {min_panel:e}"
    )]
    Unresolved {
        width: f64,
        min_panel: f64,
        panels: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("evaluation point (t = {t}, x = {x}) lies outside (0, T] x R")]
    EvalPointOutside { t: f64, x: f64 },

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("quadrature node at x = 0 is not allowed")]
    InterfaceNode,

    #[error("sample set is empty")]
    EmptySample,

    #[error("seed list is empty")]
    EmptySeeds,

    #[error("ladder is not dyadically nested: {0}")]
    NonNestedLadder(String),

    #[error("{identity} scan failed at (t = {t}, x = {x}, y = {y}): {source}")]
    ScanFailed {
        identity: &'static str,
        t: f64,
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },
}
