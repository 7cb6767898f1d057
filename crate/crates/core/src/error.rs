use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate collocation grid: need at least {min} points, got {n}")]
    DegenerateGrid { n: usize, min: usize },

    #[error("invalid coordinate map: {0}")]
    InvalidMap(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("eigensolver failed at omega = {omega} rad/us, case {case}: {message}")]
    Solver { omega: f64, case: String, message: String },

    #[error("no finite eigenvalues at omega = {omega} rad/us, case {case}")]
    DegenerateProblem { omega: f64, case: String },

    #[error("root refinement did not converge after {iterations} iterations (last |dk|/|k| = {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown material '{0}'")]
    UnknownMaterial(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
