//! Numerical tools for Anosov representations of free groups: singular
//! value gaps, boundary maps, hyperconvexity scans and dimension estimates
//! of limit sets.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod automaton;
pub mod constructions;
pub mod dimension;
pub mod error;
pub mod exterior;
pub mod fit;
pub mod geom;
pub mod hyperconvexity;
pub mod lemmas;
pub mod representation;

pub use automaton::{BoundaryRay, GeneratorAlphabet, GeodesicAutomaton, GroupWord, Letter};
pub use error::{Error, Result};
pub use geom::{CartanDecomposition, SquareMatrix, Subspace};
