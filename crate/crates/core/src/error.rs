//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point violates the {model} model constraint (defect {defect:.3e})")]
    InvalidPoint { model: &'static str, defect: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("no vertex lies inside the requested ball")]
    EmptyBall,

    #[error("mesh topology error: {0}")]
    MeshTopology(String),

    #[error("degenerate face {face} (area {area:.3e})")]
    DegenerateFace { face: usize, area: f64 },

    #[error("geodesic edge lengths of face {face} violate the triangle inequality")]
    EdgeLengths { face: usize },

    #[error("{what} is not positive definite (margin {margin:.3e})")]
    NotElliptic { what: String, margin: f64 },

    #[error("mesh has no boundary vertices")]
    NoBoundary,

    #[error("mesh has no interior vertices")]
    NoInterior,

    #[error("operation requires a closed mesh but boundary vertices are present")]
    BoundaryPresent,

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    NoConvergence { best_residual: f64, iterations: usize },

    #[error("level-set sweep is degenerate (near-constant function)")]
    DegenerateSweep,

    #[error("curvature fit is rank deficient at vertex {vertex}")]
    CurvatureFit { vertex: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
