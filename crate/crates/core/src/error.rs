use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: input/parse problems (bad files, malformed
/// records) and domain failures (a structure violates a mathematical
/// precondition, a solver does not converge, a resource guard trips).
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} has valence {valence}, valence below 3")]
    ValenceBelowThree { vertex: usize, valence: usize },

    #[error("edges[{index}] ('{edge}') has non-positive length {length}")]
    NonPositiveLength {
        index: usize,
        edge: String,
        length: f64,
    },

    #[error("graph is disconnected: vertex {vertex} is unreachable from vertex 0")]
    Disconnected { vertex: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("transition structure is reducible")]
    Reducible,

    #[error("predicted {predicted:.0} items exceeds the enumeration cap {cap}")]
    ResourceCap { predicted: f64, cap: usize },

    #[error("no closed geodesics with length below {threshold}")]
    NoGeodesics { threshold: f64 },

    #[error("potential error: {0}")]
    Potential(String),

    #[error("potential depth {potential} exceeds state depth {state}")]
    DepthMismatch { potential: usize, state: usize },

    #[error("potential must be strictly positive, found value {value} on word {word}")]
    NotPositive { word: String, value: f64 },

    #[error("potential is not centered: mean {mean:e} (enable mean subtraction)")]
    NotCentered { mean: f64 },

    #[error("vector is not tangent: constraint residual {residual:e}")]
    NotTangent { residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("hexagon sides must be positive and finite, got ({0}, {1}, {2})")]
    HexagonInput(f64, f64, f64),

    #[error("invalid triangulation: {0}")]
    Triangulation(String),

    #[error("hexagon {hexagon} fails to close up: residual {residual:e}")]
    ClosureFailure { hexagon: usize, residual: f64 },

    #[error("non-hyperbolic element: |trace| = {trace}")]
    NonHyperbolic { trace: f64 },

    #[error("base point outside the cone: margin {margin}")]
    OutsideCone { margin: f64 },

    #[error("unknown {kind} strategy '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of input handling (I/O, file syntax), false for
    /// domain errors.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
