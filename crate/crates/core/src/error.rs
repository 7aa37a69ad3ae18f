use thiserror::Error;

/// Errors produced by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("Gauss-Legendre rule with {0} points is not supported (1..=16)")]
    QuadratureOrder(usize),

    /// The deformation (or geometric mapping) inverts an element.
    #[error("non-positive Jacobian determinant {det:e} in element {element}{}", level_suffix(*.level))]
    NonPositiveJacobian {
        element: usize,
        det: f64,
        level: Option<usize>,
    },

    #[error("operator is not positive definite (p.Ap = {0:e})")]
    IndefiniteOperator(f64),

    #[error("Newton solver did not converge within {iterations} iterations in load step {step}")]
    MaxNewtonIterations { step: usize, iterations: usize },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    LinearSolver { iterations: usize, residual: f64 },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn level_suffix(level: Option<usize>) -> String {
    match level {
        Some(l) => format!(" on multigrid level {l}"),
        None => String::new(),
    }
}

impl Error {
    /// Process exit code of the command-line tool: 2 configuration, 3
    /// solver or failed self-check, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Mesh(_) | Error::QuadratureOrder(_) | Error::Json(_) => 2,
            Error::NonPositiveJacobian { .. }
            | Error::IndefiniteOperator(_)
            | Error::MaxNewtonIterations { .. }
            | Error::LinearSolver { .. }
            | Error::Verification(_) => 3,
            Error::Io(_) | Error::Csv(_) => 4,
        }
    }

    /// Attach a multigrid level to a `NonPositiveJacobian` error.
    pub fn on_level(self, level: usize) -> Self {
        match self {
            Error::NonPositiveJacobian { element, det, .. } => Error::NonPositiveJacobian {
                element,
                det,
                level: Some(level),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
