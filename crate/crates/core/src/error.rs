use thiserror::Error;

/// Errors produced anywhere in the geometry, network, construction and oracle layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("singular affine map (|det| = {det:e})")]
    SingularMap { det: f64 },

    #[error("map {map} is not contractive (largest singular value {norm})")]
    NotContractive { map: usize, norm: f64 },

    #[error("containment violated: image of seed part {part} under map {map} fits in no seed part (witness {witness:?})")]
    ContainmentViolation {
        map: usize,
        part: usize,
        witness: Vec<f64>,
    },

    #[error("separation violated between images of maps {first} and {second}: margin {margin:e} at {witness:?}")]
    SeparationViolation {
        first: usize,
        second: usize,
        margin: f64,
        witness: Vec<f64>,
    },

    #[error("separation for map {map} is not positive (delta = {delta:e})")]
    NonPositiveSeparation { map: usize, delta: f64 },

    #[error("delta must be positive, got {delta}")]
    NonPositiveDelta { delta: f64 },

    #[error("linear program is infeasible (empty region)")]
    InfeasibleRegion,

    #[error("linear program is unbounded")]
    UnboundedProgram,

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("origin lies inside the closure of the first iterate (indicator value {value})")]
    OriginInsideU1 { value: f64 },

    #[error("word enumeration needs {required} polytopes, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("point {point:?} lies in more than one map image")]
    AmbiguousBranch { point: Vec<f64> },

    #[error("degenerate bounding box")]
    DegenerateBox,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
