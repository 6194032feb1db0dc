use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("behavior does not fit vertex {vertex}: {reason}")]
    BehaviorMismatch { vertex: u32, reason: String },

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("initial state not compatible with graph: {0}")]
    IncompatibleInitialState(String),

    #[error("subspace is not invariant under the step operator (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error(
        "degeneracy condition violated: the limiting characteristic equation has a double root \
         only for phi = pi, pi/3 or -pi/3 (got phi = {phi})"
    )]
    NoDegeneratePair { phi: f64 },

    #[error("no exact eigenvalue within {window:.3e} of the predicted {predicted}")]
    PredictionMismatch { predicted: String, window: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigensolver failed to converge for a {dim}x{dim} matrix")]
    Convergence { dim: usize },
}
