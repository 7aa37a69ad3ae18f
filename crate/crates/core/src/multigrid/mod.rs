//! Geometric multigrid preconditioner for the tangent operator.
//!
//! Level operators are not Galerkin products: each level evaluates its own
//! matrix-free tangent around the displacement field injected from the
//! finest level. Residuals are restricted with the transpose of the
//! embedding prolongation. Smoothing is Jacobi-preconditioned Chebyshev
//! iteration; the coarsest level is handled by a higher-degree Chebyshev
//! polynomial tuned to reduce the residual by a fixed factor.

mod chebyshev;
mod gmg;
mod transfer;

pub use chebyshev::{chebyshev_bound, chebyshev_degree_for, estimate_eigenvalues, ChebyshevSmoother, EigenEstimate};
pub use gmg::{build_level_operators, CoarseSolver, GmgOptions, GmgPreconditioner, LevelOperator, MultigridHierarchy};
pub use transfer::TransferOperator;
