use thiserror::Error;

/// Errors raised by the graph, simulation, rank and metric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge set contains a directed cycle through node {0}")]
    CycleDetected(String),
    #[error("invalid node id {id} (graph has {n} nodes)")]
    InvalidId { id: usize, n: usize },
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("node sets overlap on {0}")]
    OverlappingSets(String),
    #[error("node set must not be empty")]
    EmptySet,
    #[error("graph too large: {size} exceeds the limit of {limit}")]
    GraphTooLarge { size: usize, limit: usize },
    #[error("conditioning node {0} is not observed")]
    NotObserved(String),
    #[error("graph has no observed sources")]
    NoObservedSources,
    #[error("every observed source acts only as a collider; no conditioning candidates remain")]
    NoCandidates,
    #[error("analytic covariance requires Gaussian noise (node {0} is not Gaussian)")]
    NonGaussianNoise(String),
    #[error("conditioning covariance is singular (smallest eigenvalue {0:e})")]
    SingularConditioning(f64),
    #[error("covariance is singular")]
    SingularCovariance,
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("log-density is not finite at the evaluation point")]
    NonFiniteDensity,
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("column {0} is constant")]
    ConstantColumn(String),
    #[error("row count mismatch: {0} vs {1}")]
    RowCountMismatch(usize, usize),
    #[error("matrix must be square, got {0}x{1}")]
    NonSquare(usize, usize),
    #[error("matrix too large for exact matching: {0} > {1}")]
    MatrixTooLarge(usize, usize),
    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
