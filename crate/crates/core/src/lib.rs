//! Numerical laboratory for holomorphic partially hyperbolic systems.
//!
//! The crate builds explicit example systems (complex torus automorphisms,
//! holomorphic skew products, Möbius-fiber systems, Blanchard–Calabi
//! families, nilmanifold automorphisms and an elliptic quotient) and measures
//! the quantities that distinguish holomorphic from merely real-analytic
//! invariant structures: invariant splittings, holonomy limits, the
//! ℂ-antilinear defect of center holonomies, quasiconformal dilatation,
//! isometry/contraction behaviour of center fibers, heat-semigroup smoothing
//! of fiber measures, Nijenhuis tensors and accessibility dimensions.
//!
//! Module map:
//!
//! * [`cxcore`]: complex and real-linear algebra, KAK factorization, Möbius
//!   dynamics on the Riemann sphere, planar dilatation.
//! * [`lattices`]: lattices in ℂⁿ, modulus reduction, torsion and degree
//!   bookkeeping.
//! * [`liecx`]: nilpotent Lie algebras with rational structure constants.
//! * [`zoo`]: the example systems as executable descriptors.
//! * [`dynamics`]: splittings, Lyapunov exponents, holonomies, linearization,
//!   ∂̄-defect, dichotomy and modulus scans.
//! * [`measures`]: particle measures, Gibbs u-state estimates and the heat
//!   semigroup on flat torus fibers.
//! * [`exec`]: data-parallel execution with a sequential fallback.

pub mod cxcore;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod lattices;
pub mod liecx;
pub mod measures;
pub mod zoo;

pub use error::{Error, Result};
pub use exec::Execution;
