//! Error type shared by all trajectory modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A query time lies outside the representation's valid domain.
    #[error("time {t} outside domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    /// Raw (sin, cos) channels are too close to the origin to define a rotation.
    #[error("heading undefined: raw (sin, cos) norm^2 = {norm2:.3e}")]
    DegenerateHeading { norm2: f64 },

    /// A time sequence is empty, non-increasing, or otherwise malformed.
    #[error("invalid time sequence: {0}")]
    InvalidTimes(&'static str),

    /// Too few waypoints for the requested polynomial degree.
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The least-squares system is rank-deficient and no ridge term was given.
    #[error("rank-deficient least-squares system (condition estimate {cond:.3e}); retry with ridge_lambda > 0")]
    SingularSystem { cond: f64 },

    /// Finite-difference schemes require uniformly spaced waypoints.
    #[error("waypoint times are not uniformly spaced")]
    NonUniformTimes,

    /// Track has fewer waypoints than the operation requires.
    #[error("track too short: need at least {needed} waypoints, got {got}")]
    TooShort { needed: usize, got: usize },

    /// An aggregate was requested over an empty collection.
    #[error("empty input")]
    EmptyInput,

    /// A numerical routine produced or encountered a non-finite value.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Heading was requested from a representation or label that has none.
    #[error("heading unavailable for this representation or label")]
    HeadingUnavailable,

    /// Configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
