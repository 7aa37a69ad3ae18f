//! Matrix-free finite-element solver for quasi-static finite-strain
//! compressible Neo-Hookean hyperelasticity on quad/hex meshes.
//!
//! The tangent operator is applied without assembling a matrix, using
//! sum-factorization kernels and one of three quadrature-point caching
//! strategies. Newton's method with load stepping drives the nonlinear solve
//! and a geometric multigrid V-cycle, whose level operators are linearized
//! around the restricted displacement field, preconditions conjugate
//! gradients.

pub mod bench;
pub mod error;
pub mod fespace;
pub mod linalg;
pub mod flops;
pub mod material;
pub mod mesh;
pub mod multigrid;
pub mod operators;
pub mod solver;
pub mod sparse;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
