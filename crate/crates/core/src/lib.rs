//! Symbolic engine for a five-dimensional CR equivalence reduction.
//!
//! The crate is organized bottom-up: exact scalars over Q(i) with a
//! derivation engine, an exterior algebra with structure-equation
//! differentiation, Lie algebras given by structure constants, polynomial
//! vector fields for the model surface, the reduction pipeline, and the
//! final connection checks.

pub mod cartan;
pub mod exterior;
pub mod liealg;
pub mod linalg;
pub mod rational;
pub mod reduce;
pub mod report;
pub mod scalar;
pub mod vecfield;

pub use rational::GaussRat;
pub use scalar::{BaseName, BaseSymbol, DerivationAlgebra, GLetter, GroupAtom, Letter, Mono, ScalarExpr};
