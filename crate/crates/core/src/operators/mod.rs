//! Residual, energy and tangent operators of the discrete finite-strain
//! problem.
//!
//! Everything is integrated over the reference configuration with the
//! reference `JxW`. Kirchhoff stress and the spatial tangent are therefore
//! cached and used without a `1/J` factor; spatial gradients are obtained
//! from reference-cell gradients through the composed inverse
//! `(F̄ · J_geo)⁻¹ = J_geo⁻¹ · F̄⁻¹`.

mod assembly;
mod cache;
mod residual;
mod tangent;

pub use assembly::{assemble_matrix, AssembledMatrix};
pub use cache::{build_cache, QuadratureCache};
pub use residual::{compute_residual, energy, Traction};
pub use tangent::{MatrixFreeTangent, TangentOperator};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How the tangent operator is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Cache `μ − 2λ ln J̄` only; rebuild `F̄` and `τ̄` on every apply.
    Scalar,
    /// Cache `2[μ − 2λ ln J̄]`, `2λ` and `τ̄`; use the closed-form tangent action.
    Tensor2,
    /// Cache `τ̄` and the full fourth-order spatial tangent.
    Tensor4,
    /// Assembled sparse matrix.
    MatrixBased,
}

impl Strategy {
    pub const MATRIX_FREE: [Strategy; 3] = [Strategy::Scalar, Strategy::Tensor2, Strategy::Tensor4];

    pub fn is_matrix_free(self) -> bool {
        self != Strategy::MatrixBased
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Scalar => "scalar",
            Strategy::Tensor2 => "tensor2",
            Strategy::Tensor4 => "tensor4",
            Strategy::MatrixBased => "matrix_based",
        }
    }

    /// Scalars cached per quadrature point, excluding geometry.
    ///
    /// 3D: 1, 2 + 6 = 8, 6 + 21 = 27. 2D: 1, 2 + 3 = 5, 3 + 6 = 9 (the
    /// spatial tangent is stored as the upper triangle of its 3 × 3 Voigt
    /// matrix).
    pub fn payload_per_qpoint(self, dim: usize) -> usize {
        let sym = crate::tensor::sym_len(dim);
        match self {
            Strategy::Scalar => 1,
            Strategy::Tensor2 => 2 + sym,
            Strategy::Tensor4 => sym + crate::material::MaterialTangent::packed_len(dim),
            Strategy::MatrixBased => 0,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Strategy::Scalar),
            "tensor2" => Ok(Strategy::Tensor2),
            "tensor4" => Ok(Strategy::Tensor4),
            "matrix_based" | "matrix-based" => Ok(Strategy::MatrixBased),
            other => Err(Error::Config(format!("unknown operator strategy '{other}'"))),
        }
    }
}

/// Element loop execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Single-threaded reference path.
    #[default]
    Sequential,
    /// Element kernels on the rayon pool; results are scattered in element
    /// order, so the output is bitwise identical to the sequential path.
    Parallel,
}

/// Reference gradient `Gξ[a][d] = ∂u_a/∂ξ_d` at point `q` from per-component
/// gradient blocks laid out as `grads[(a * D + d) * n_q + q]`.
#[inline]
pub(crate) fn reference_gradient<const D: usize>(grads: &[f64], n_q: usize, q: usize) -> crate::tensor::Mat<D> {
    let mut g = crate::tensor::zero::<D>();
    for (a, row) in g.iter_mut().enumerate() {
        for (d, v) in row.iter_mut().enumerate() {
            *v = grads[(a * D + d) * n_q + q];
        }
    }
    g
}

#[inline]
pub(crate) fn store_gradient<const D: usize>(grads: &mut [f64], n_q: usize, q: usize, m: &crate::tensor::Mat<D>) {
    for (a, row) in m.iter().enumerate() {
        for (d, v) in row.iter().enumerate() {
            grads[(a * D + d) * n_q + q] = *v;
        }
    }
}

/// Reference gradients of every component of a component-major local vector.
pub(crate) fn evaluate_gradients(
    sf: &crate::fespace::SumFactorization<'_>,
    dim: usize,
    local: &[f64],
    grads: &mut [f64],
    scratch: &mut crate::fespace::Scratch,
    tally: &mut crate::flops::FlopTally,
) {
    let n = sf.n_dofs();
    let block = dim * sf.n_q();
    for c in 0..dim {
        sf.evaluate(&local[c * n..(c + 1) * n], None, Some(&mut grads[c * block..(c + 1) * block]), scratch, tally);
    }
}

/// Integrate per-component gradient blocks against test-function gradients.
pub(crate) fn integrate_gradients(
    sf: &crate::fespace::SumFactorization<'_>,
    dim: usize,
    grads: &[f64],
    local: &mut [f64],
    scratch: &mut crate::fespace::Scratch,
    tally: &mut crate::flops::FlopTally,
) {
    let n = sf.n_dofs();
    let block = dim * sf.n_q();
    for c in 0..dim {
        sf.integrate(None, Some(&grads[c * block..(c + 1) * block]), &mut local[c * n..(c + 1) * n], scratch, tally);
    }
}
