//! Common-cause boxes in Bell scenarios: exact convertibility and
//! nonclassicality monotones under local operations and shared randomness.
//!
//! A *box* is a family of conditional distributions P(xy|st) shared by two
//! wings; the free operations are local deterministic processings of each
//! wing's classical input and output, mixed by shared randomness (LOSR).
//! This crate decides single-copy convertibility between boxes by exact
//! linear programming over the finite set of deterministic operations,
//! computes the induced partial order, and evaluates nonclassicality
//! monotones built from CHSH-type inequalities.
//!
//! Modules:
//! - [`boxes`]: box types, validation, correlator coordinates, CHSH values.
//! - [`free_ops`]: deterministic local operations, enumeration, group
//!   structure of the reversible ones, orbits, and symmetrization.
//! - [`ordering`]: LP-based convertibility with feasibility certificates.
//! - [`monotones`]: CHSH yield and noisy-resource cost monotones, closed
//!   forms and LP/bisection oracles, plus derived monotones.
//! - [`analysis`]: sensitivity, equivalence classes, one-parameter
//!   families, antichain/chain certification, order-structure checks.
//! - [`catalog`]: named boxes (PR, noisy PR, isotropic-like families,
//!   quantum-realizable examples).
//! - [`sampling`]: seeded random free and nonfree boxes.
//! - [`json`]: serialization of boxes and operations.
//!
//! All core computations are exact over big rationals; approximate inputs
//! carry explicit error bounds and comparisons refuse to decide within
//! those bounds rather than guessing.

pub mod analysis;
pub mod boxes;
pub mod catalog;
pub mod error;
pub mod free_ops;
pub mod json;
pub mod lp;
pub mod monotones;
pub mod ordering;
pub mod sampling;
pub mod scalar;
pub mod verify;

#[cfg(test)]
pub(crate) mod test_util;

pub use boxes::{BoxType, CcBox};
pub use error::{Error, Result};
pub use scalar::{Rat, Scalar};
