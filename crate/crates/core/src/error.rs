use nalgebra::Complex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid graph: {0}")]
    Validation(String),

    #[error("limit exceeded: {0}")]
    LimitExceeded(String),

    /// Fixed points are not saddles, so the connection combinatorics do not apply.
    #[error("saddle condition violated: r*exp(-gamma*xhat) = {0} >= 1")]
    NotSaddle(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("root finder did not converge (worst residual {residual:e}); best iterate {best:?}")]
    RootsNotConverged {
        best: Vec<Complex<f64>>,
        residual: f64,
    },

    #[error("simulation diverged at iteration {iteration}: {message}")]
    Diverged { iteration: u64, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
