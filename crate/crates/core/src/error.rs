//! Error type shared by every numerical routine in the crate.

use thiserror::Error;

/// Failure modes of evaluations and identity checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A product or series base has modulus at least one.
    #[error("base {modulus} has modulus >= 1, infinite product or series diverges")]
    DivergentBase { modulus: f64 },
    /// The series argument lies outside the disc of convergence.
    #[error("series argument modulus {modulus} lies outside the convergence disc")]
    OutsideConvergence { modulus: f64 },
    /// The iteration budget ran out before the tail tolerance was met.
    #[error("truncation budget of {limit} terms exhausted before convergence")]
    CapExceeded { limit: usize },
    /// A denominator vanished within tolerance.
    #[error("pole hit: {what} (|denominator| = {magnitude:e})")]
    PoleHit { what: String, magnitude: f64 },
    /// An argument that must be nonzero was zero.
    #[error("argument {what} must be nonzero")]
    ZeroArgument { what: &'static str },
    /// Leg indices passed to an embedding are invalid.
    #[error("invalid legs ({i}, {j}) for {n} tensor factors")]
    BadLegs { i: usize, j: usize, n: usize },
    /// Rotation index shares a factor with r + 1.
    #[error("rotation {aleph} is not coprime to r + 1 = {modulus}")]
    NotCoprime { aleph: usize, modulus: usize },
    /// Generator or basis index out of range.
    #[error("index {index} out of range for rank {rank}")]
    BadIndex { index: usize, rank: usize },
    /// PBW label with invalid index data.
    #[error("invalid PBW label: {0}")]
    BadLabel(String),
    /// Heights of a face weight violate the unit-step rule.
    #[error("inadmissible heights ({l}, {lp}, {m}, {mp})")]
    InadmissibleHeights { l: i64, lp: i64, m: i64, mp: i64 },
    /// Matrix that had to be inverted is singular.
    #[error("singular matrix of size {size}")]
    Singular { size: usize },
    /// The worker thread pool could not be created.
    #[error("thread pool: {0}")]
    ThreadPool(String),
    /// Dimension mismatch between operands.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Returns `PoleHit` when `den` is within `tol` of zero.
pub(crate) fn guard_pole(den: num_complex::Complex64, tol: f64, what: &str) -> Result<()> {
    if den.norm() < tol {
        Err(Error::PoleHit { what: what.to_string(), magnitude: den.norm() })
    } else {
        Ok(())
    }
}
