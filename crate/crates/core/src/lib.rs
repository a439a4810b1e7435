//! Invariant almost Hermitian geometry on almost abelian Lie algebras.
//!
//! Given the defining matrix L of a 2n-dimensional almost abelian Lie algebra
//! with a compatible almost complex structure, this crate computes the full
//! invariant tensor calculus, decides harmonicity of J by independent routes,
//! classifies the structure into Gray-Hervella classes, decides the SKT
//! property, verifies lattice witnesses with exact integer arithmetic, and
//! minimizes the Dirichlet energy over compatible complex structures.
//!
//! Computations run in one of two scalar contexts: `f64` with scale-adjusted
//! tolerances, or exact rational arithmetic where every class predicate is a
//! literal zero test.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod catalog;
pub mod connection;
pub mod error;
pub mod flow;
pub mod gh;
pub mod harmonic;
pub mod jsonio;
pub mod lattice;
pub mod mat;
pub mod report;
pub mod scalar;
pub mod skt;
pub mod tensors;

pub use algebra::{standard_j, AlgebraSpec, ComplexStructure, Decomposition};
pub use error::{Error, Result};
pub use mat::Mat;
pub use scalar::{Exact, Mode, Scalar, ScalarContext, ZeroTest, DEFAULT_TOLERANCE};
