//! Lattices in ℂⁿ, flat torus arithmetic, one-dimensional moduli and the
//! integer bookkeeping (degrees, torsion counts) used by the examples.

mod degree;
mod lattice;
mod modulus;

pub use degree::{det_degree, involution_fixed_fibers, DegreeReport};
pub use lattice::{clinear_extension_residual, Lattice};
pub use modulus::{apply_word, modulus_reduce, torus_equivalent_1d, ModularGenerator, Modulus, MODULUS_TOL};
