//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by mesh construction, assembly, and solves.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction input (bad interval, non-positive element
    /// count, parameter out of range, …).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The fractional order is outside the admissible range for the
    /// requested operation (`s = 1/2` is excluded for the integral kinds).
    #[error("fractional order s = {s} not admissible: {reason}")]
    BadOrder { s: f64, reason: String },

    /// Two objects built on different meshes were combined.
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    /// A dense linear-algebra operation failed (factorization or
    /// eigensolve did not complete).
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// Adaptive quadrature did not reach the requested tolerance within
    /// its refinement budget.
    #[error("quadrature refinement budget exceeded: {0}")]
    QuadratureBudget(String),

    /// A precondition documented on the operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}
