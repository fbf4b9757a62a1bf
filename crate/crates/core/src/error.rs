use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    NodeOutOfRange { index: usize, num_nodes: usize },

    #[error("edge ({u}, {v}) has invalid weight {weight}")]
    InvalidWeight { u: usize, v: usize, weight: f64 },

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid sparse matrix: {0}")]
    InvalidSparse(String),

    #[error(
        "eigendecomposition limited to {limit} nodes (got {size}); use the Chebyshev transform path"
    )]
    OracleTooLarge { size: usize, limit: usize },

    #[error("power iteration did not converge after {iterations} iterations (best bound {best_bound})")]
    NotConverged { iterations: usize, best_bound: f64 },

    #[error("degenerate Chebyshev domain [{lo}, {hi}]")]
    DegenerateDomain { lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exact transform mode requires an eigendecomposition")]
    MissingSpectrum,

    #[error("spectral bound {bound} is below a Laplacian diagonal entry {diagonal}")]
    BoundViolated { bound: f64, diagonal: f64 },

    #[error("operator would hold {nnz} stored entries, over the budget of {budget}")]
    OperatorTooLarge { nnz: usize, budget: usize },

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Diverged { epoch: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
