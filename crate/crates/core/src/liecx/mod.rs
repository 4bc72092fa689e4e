//! Nilpotent Lie algebras with rational structure constants: brackets,
//! automorphism and integrability checks, hyperbolic splittings and
//! accessibility subalgebras.

mod algebra;
mod catalog;
pub mod rational;
mod splitting;

pub use algebra::{AutomorphismCheck, StructureAlgebra};
pub use catalog::{catalog_names, load, parse_entry, CatalogEntry};
pub use rational::{QMatrix, Rational};
pub use splitting::{
    accessibility_dimension, hyperbolic_splitting, is_invariant_exact, spectral_splitting, Accessibility,
    HyperbolicSplitting, SpectralSplitting, UNIMODULAR_TOL,
};
