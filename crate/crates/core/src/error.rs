//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its depth budget before reaching the
    /// requested tolerance.
    #[error("quadrature failed to converge: {0}")]
    Convergence(String),

    /// Series expansion requested beyond the factorial-overflow guard.
    #[error("series order {requested} exceeds cap {cap}")]
    UnsupportedOrder { requested: usize, cap: usize },

    /// Propagator chains are implemented for up to four momenta.
    #[error("propagator chains support 1..=4 momenta, got {0}")]
    UnsupportedArity(usize),

    /// Gaussian moments are implemented for ranks 0..=4.
    #[error("gaussian moments support rank 0..=4, got {0}")]
    UnsupportedRank(usize),

    /// A vertex was requested outside the kinematic configuration it is
    /// defined for.
    #[error("vertex undefined at this kinematic configuration: {0}")]
    UnsupportedKinematics(String),

    /// The linear system equating diagram and ansatz coefficients is
    /// degenerate at the requested point.
    #[error("extraction system is singular: {0}")]
    SingularSystem(String),

    /// Requested a projector channel that degenerates in this dimension.
    #[error("projector Gram matrix is singular: {0}")]
    SingularGram(String),

    /// Mismatched dimensions between containers.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Dense eigendecomposition did not converge.
    #[error("eigendecomposition failed: {0}")]
    EigensolveFailure(String),

    /// Contour integration requires the pole strictly inside the contour.
    #[error("pole at {pole} lies outside the contour")]
    PoleOutsideContour { pole: f64 },

    /// A floating-point overflow would occur (e.g. `exp` of a huge argument).
    #[error("overflow in {0}")]
    Overflow(String),

    /// The requested spectral integral does not converge.
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    /// Field data violates its reality or layout invariants.
    #[error("invalid field data: {0}")]
    InvalidFieldData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
