use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("exterior origin: ray origin lies outside the body")]
    ExteriorOrigin,

    #[error("degenerate vertex star at vertex {0} (zero-area link)")]
    DegenerateVertex(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("radial degeneracy: radial function would lose positivity (min r = {0:.3e})")]
    RadialDegeneracy(f64),

    #[error("ray exit failed after {0} retries")]
    RayExit(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
