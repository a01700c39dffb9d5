use thiserror::Error;

use crate::onebit::EnsembleKind;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid sphere dimension n = {0} (need n >= 1)")]
    InvalidDimension(usize),

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("invalid sparsity: need 0 < s < n + 1, got n = {n}, s = {s}")]
    InvalidSparsity { n: usize, s: usize },

    #[error("geodesic endpoints are equal or antipodal")]
    DegenerateGeodesic,

    #[error("direction does not separate the two points")]
    NotSeparating,

    #[error("operation requires a {expected:?} ensemble, got {found:?}")]
    WrongEnsembleKind {
        expected: EnsembleKind,
        found: EnsembleKind,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("{count} points exceeds the feasible maximum of {max}")]
    TooManyPoints { count: usize, max: usize },

    #[error("cholesky factorization failed with jitter up to {jitter:e}")]
    Factorization { jitter: f64 },

    #[error("points {i} and {j} are at distance {distance} < {min_sep}")]
    BelowSeparation {
        i: usize,
        j: usize,
        distance: f64,
        min_sep: f64,
    },

    #[error("sign pattern lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid sign character {0:?}")]
    InvalidSign(char),
}
