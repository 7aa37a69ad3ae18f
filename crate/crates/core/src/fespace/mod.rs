//! Tensor-product Lagrange finite element spaces.

mod basis;
mod dofmap;
mod quadrature;
mod space;
pub mod sumfact;

pub use basis::Basis1D;
pub use dofmap::{build_dof_map, distribute_local_to_global, ConstraintSet, DofMap};
pub use quadrature::{gauss_legendre, Quadrature1D};
pub use space::FeSpace;
pub use sumfact::{Scratch, SumFactorization};
