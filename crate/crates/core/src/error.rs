//! Structured errors shared across the toolkit.

/// Every failure mode callers are expected to branch on.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed domain input (dimensions, exponents, grids, options).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Torsion matrix numerically singular at the requested basepoint.
    #[error(
        "torsion matrix singular at a = {basepoint}: |det| = {det:.3e} is below \
         the threshold {threshold:.3e}"
    )]
    SingularTorsion {
        basepoint: f64,
        det: f64,
        threshold: f64,
    },

    /// Work estimate exceeds the configured budget; nothing was computed.
    #[error("resource budget exceeded for {what}: needs {needed}, budget {budget}")]
    Budget {
        what: &'static str,
        needed: u64,
        budget: u64,
    },

    /// Two sampled objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An operation that divides by a norm received zero-mass input.
    #[error("zero-norm input to {0}")]
    ZeroNorm(&'static str),

    /// A NaN or infinity appeared; the offending operation is named.
    #[error("non-finite value produced by {op}")]
    NonFinite { op: String },

    /// The (p, q, d) triple is off the scaling line or outside the valid range.
    #[error("scaling relation violated: {0}")]
    Scaling(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Error {
        Error::Invalid(msg.into())
    }
}

/// Guard helper: returns a `NonFinite` error naming `op` unless `v` is finite.
pub fn ensure_finite(v: f64, op: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { op: op.to_string() })
    }
}
