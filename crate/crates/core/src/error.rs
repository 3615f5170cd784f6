use thiserror::Error;

/// Errors raised by the model, channel evaluation and optimizer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature did not converge after {nodes} nodes (relative residual {residual:e})")]
    Quadrature { nodes: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("reciprocity violated at ({row}, {col}): relative asymmetry {asymmetry:e}")]
    Reciprocity {
        row: usize,
        col: usize,
        asymmetry: f64,
    },

    #[error("equivalent RIS impedance matrix is singular (zero pivot at column {column})")]
    Singular { column: usize },

    #[error("degenerate denominator: {0}")]
    Degenerate(&'static str),

    #[error("load infeasible: {0}")]
    Infeasible(String),

    #[error(
        "line search stalled at iteration {iteration} after {inner_loops} trials \
         (mu = {mu:e}, trial objective {trial_objective:e}, minorant {minorant:e}, current {current:e})"
    )]
    Stall {
        iteration: usize,
        inner_loops: usize,
        mu: f64,
        trial_objective: f64,
        minorant: f64,
        current: f64,
    },

    #[error("impedance file: {0}")]
    Io(#[from] std::io::Error),

    #[error("impedance file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
