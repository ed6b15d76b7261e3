use thiserror::Error;

/// Errors raised by the geometry kernels, mesh handling and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration where the operation is undefined (coincident points,
    /// antipodes, zero-area faces, rank-deficient stencils).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// The mesh violates one of the closed-surface invariants.
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// A mesh or report file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// An iterative solver hit its iteration cap.
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A per-vertex field does not match the mesh it is used with.
    #[error("field has {found} entries but the mesh has {expected} vertices")]
    FieldMismatch { expected: usize, found: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::Degenerate(msg.into())
}
