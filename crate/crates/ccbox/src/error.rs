//! Error taxonomy shared by every module.
//!
//! Decision procedures in this crate refuse to guess: boundary cases that
//! exact arithmetic could settle but approximate arithmetic cannot are
//! surfaced as [`Error::AmbiguousBoundary`] or [`Error::ApproxUnsound`]
//! instead of being rounded into an answer.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A probability entry is negative beyond its tolerance.
    #[error("negative probability at (s={s}, t={t}, x={x}, y={y}): {value}")]
    NegativeProbability {
        s: usize,
        t: usize,
        x: usize,
        y: usize,
        value: String,
    },

    /// A setting block does not sum to one.
    #[error("block (s={s}, t={t}) sums to {total}, expected 1")]
    NotNormalized { s: usize, t: usize, total: String },

    /// A marginal distribution depends on the remote setting.
    #[error("signalling detected on wing {wing}: {detail}")]
    SignallingDetected { wing: char, detail: String },

    /// Operation requires a different box type.
    #[error("wrong box type: expected {expected}, found {found}")]
    WrongType { expected: String, found: String },

    /// Two objects that must share a type do not.
    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    /// Mixture weights are invalid.
    #[error("bad mixture weights: {0}")]
    WeightError(String),

    /// A scalar parameter is outside its documented range.
    #[error("bad parameter: {0}")]
    BadParameter(String),

    /// A mixture anchor fails the boundary conditions.
    #[error("bad anchor: {0}")]
    BadAnchor(String),

    /// A generator passed to group closure is not an invertible symmetry.
    #[error("operation is not invertible")]
    NotInvertible,

    /// An enumeration would exceed the configured cap.
    #[error("enumeration of {required} items exceeds cap {cap}")]
    ResourceLimit { required: u128, cap: u64 },

    /// Malformed serialized input (JSON structure, rational syntax).
    #[error("parse error: {0}")]
    Parse(String),

    /// Approximate arithmetic cannot separate a value from a decision
    /// boundary within the propagated tolerance.
    #[error("ambiguous boundary: {0}")]
    AmbiguousBoundary(String),

    /// An LP decision on approximate inputs falls inside the soundness
    /// margin (10x the input tolerance) and is therefore not reported.
    #[error("approximate decision unsound: distance {distance:e} within margin {margin:e}")]
    ApproxUnsound { distance: f64, margin: f64 },

    /// Free boxes form a single equivalence class with no finite orbit
    /// representation; callers must handle them separately.
    #[error("free boxes form one equivalence class; no finite orbit applies")]
    FreeBoxClass,

    /// Internal invariant violated. Indicates a bug, never user input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
