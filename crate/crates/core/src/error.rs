use thiserror::Error;

use crate::solver::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set of size {p} exceeds the exhaustive limit of {limit}")]
    GroundSetTooLarge { p: usize, limit: usize },

    #[error("negative duality gap {0:e}: iterate outside the base polytope or broken oracle")]
    NegativeGap(f64),

    #[error("solver did not reach the requested gap within {} iterations (best gap {:e})", .0.iterations, .0.final_gap)]
    MaxIterationsExceeded(Box<SolveReport>),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("reduced ground set is empty")]
    DegenerateGroundSet,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("element {0} flagged both active and inactive")]
    ConflictingVerdict(usize),

    #[error("edge ({i}, {j}) has negative weight {weight}")]
    NegativeEdgeWeight { i: usize, j: usize, weight: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("kernel factorization failed at pivot {0}")]
    FactorizationFailure(usize),

    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("seed sets must be disjoint and nonempty")]
    EmptySeeds,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
