//! Preconditioned CG and Newton's method with load stepping.

mod cg;
mod newton;

pub use cg::{cg, CgReport};
pub use newton::{
    apply_load_fraction, convergence_order, newton_solve, IterationRecord, Jacobi, NewtonSettings,
    PreconditionerKind, Problem, RunLog, StepSummary,
};
