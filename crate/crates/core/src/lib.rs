//! Exact algorithms for unimodular isomorphism of convex lattice polytopes.
//!
//! The crate decides whether two full-dimensional lattice polytopes are
//! related by a map `x ↦ Ux + Z` with `U ∈ GL_n(Z)`, enumerates all such maps,
//! reduces graph isomorphism to this problem, samples the Gaussian
//! distribution over an isomorphism class and runs a sigma protocol proving
//! knowledge of an isomorphism. All arithmetic on lattice data is exact.

pub mod avgcase;
pub mod error;
pub mod exactalg;
pub mod gaussian;
pub mod polytope;
pub mod random;
pub mod reduction;
pub mod uip;
pub mod zkp;

pub use error::{Error, Result};
