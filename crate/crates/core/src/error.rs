use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("graph is disconnected: {0}")]
    Disconnected(String),
    #[error("depth bound exceeded: requested {requested}, bound {bound}")]
    DepthBound { requested: usize, bound: usize },
    #[error("connection is missing {} cells, first: {:?}", .0.len(), .0.first())]
    MissingCells(Vec<[usize; 4]>),
    #[error("solver did not converge, best residual {best_residual:.3e}")]
    NoConvergence { best_residual: f64 },
    #[error("square is not symmetric")]
    NotSymmetric,
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("undecided at depth {depth}: {reason}")]
    Undecided {
        depth: usize,
        reason: String,
        dims: Vec<Vec<usize>>,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
