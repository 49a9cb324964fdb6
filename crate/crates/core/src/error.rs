use thiserror::Error;

/// Errors raised by the geometry engine.
///
/// Numeric failures inside a certification run are encoded in the report
/// verdict instead; these variants cover malformed inputs and operations that
/// are undefined at the requested point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree exceeds dimension: degree {degree} on a {dim}-dimensional chart")]
    DegreeOverflow { degree: usize, dim: usize },

    #[error("interior product is undefined on a 0-form")]
    InteriorOfFunction,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("form must have top degree {expected}, found degree {found}")]
    NotTopDegree { expected: usize, found: usize },

    #[error("point {coords:?} leaves the chart closure")]
    OutsideChart { coords: Vec<f64> },

    #[error(
        "metric is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:e})"
    )]
    NotPositiveDefinite {
        point: Vec<f64>,
        min_eigenvalue: f64,
    },

    #[error("singular {what} at {point:?}")]
    Singular { what: &'static str, point: Vec<f64> },

    #[error("Weyl identically zero below dimension 4 is out of scope (dimension {0})")]
    WeylBelowFour(usize),

    #[error("general k contraction chain ambiguous; only k=1 implemented (dimension {0}, need 5)")]
    LadderDimension(usize),

    #[error("conformal factor must be positive, found {value:e} at {point:?}")]
    NonPositiveFactor { value: f64, point: Vec<f64> },

    #[error("coefficient profile must be positive, found {value:e} at u = {at}")]
    NonPositiveProfile { value: f64, at: f64 },

    #[error("invariance ill-posed on zero kernel")]
    ZeroKernel,

    #[error("periodic trapezoid rule requires every axis periodic (axis {axis} is not)")]
    NonPeriodicAxis { axis: usize },

    #[error("NaN encountered at node {point:?}")]
    NotANumber { point: Vec<f64> },

    #[error("invalid quadrature specification: {0}")]
    InvalidQuadrature(String),

    #[error("loop needs at least {min} nodes, got {found}")]
    LoopTooCoarse { min: usize, found: usize },

    #[error("loop does not close: endpoint mismatch {gap:e}")]
    LoopNotClosed { gap: f64 },

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("incompatible case: {0}")]
    Incompatible(String),

    #[error("missing predicate input: {0}")]
    MissingInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
