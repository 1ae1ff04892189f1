//! Last-erased-loop fractions on the square lattice.
//!
//! The fraction of closed walks whose last erased loop is a given
//! self-avoiding polygon `p` is computed exactly in ℚ[1/π] from a finite
//! determinant on the patch around `p`, and cross-checked against
//! generating functions, finite-graph sieves and brute-force enumeration.

pub mod error;
pub mod finite;
pub mod green;
pub mod lattice;
pub mod linalg;
pub mod oracle;
pub mod ring;
pub mod series;
pub mod sieve;
pub mod store;

pub use error::{Error, Result};
