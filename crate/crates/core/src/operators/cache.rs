use super::{evaluate_gradients, reference_gradient, Strategy};
use crate::error::{Error, Result};
use crate::fespace::{FeSpace, Scratch, SumFactorization};
use crate::flops::FlopTally;
use crate::material::{kinematics_from_displacement_gradient, Hyperelastic, MaterialSet};
use crate::tensor::{self, pack_sym, sym_len, Mat};

/// Quadrature-point data of the linearization point `ū` for one
/// matrix-free strategy.
///
/// * scalar: `μ − 2λ ln J̄`; the operator keeps a copy of `ū` and rebuilds
///   `F̄`, `τ̄` and the spatial mapping on every application.
/// * tensor2: `2[μ − 2λ ln J̄]`, `2λ`, packed `τ̄`, plus `J_geo⁻¹ F̄⁻¹`.
/// * tensor4: packed `τ̄`, packed `J𝒞̄`, plus `J_geo⁻¹ F̄⁻¹`.
#[derive(Debug, Clone)]
pub struct QuadratureCache {
    strategy: Strategy,
    dim: usize,
    n_q: usize,
    n_elements: usize,
    payload: Vec<f64>,
    spatial_inverse: Vec<f64>,
    linearization: Vec<f64>,
}

impl QuadratureCache {
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn stride(&self) -> usize {
        self.strategy.payload_per_qpoint(self.dim)
    }

    #[inline]
    pub fn payload(&self, element: usize, q: usize) -> &[f64] {
        let s = self.stride();
        let off = (element * self.n_q + q) * s;
        &self.payload[off..off + s]
    }

    /// `(F̄ J_geo)⁻¹ = J_geo⁻¹ F̄⁻¹`; only stored by tensor2 and tensor4.
    #[inline]
    pub fn spatial_inverse<const D: usize>(&self, element: usize, q: usize) -> Mat<D> {
        let off = (element * self.n_q + q) * D * D;
        let mut m = tensor::zero::<D>();
        for (i, row) in m.iter_mut().enumerate() {
            row.copy_from_slice(&self.spatial_inverse[off + i * D..off + (i + 1) * D]);
        }
        m
    }

    /// The linearization point; only kept by the scalar strategy.
    pub fn linearization(&self) -> &[f64] {
        &self.linearization
    }

    /// Scalars stored per quadrature point, counting the geometric data the
    /// strategy reads during an apply (`JxW` always; `J_geo⁻¹` for scalar,
    /// `J_geo⁻¹ F̄⁻¹` otherwise). The scalar strategy's nodal copy of `ū` is
    /// not per quadrature point and is reported by [`memory_bytes`](Self::memory_bytes).
    pub fn scalars_per_qpoint(&self) -> usize {
        self.stride() + self.dim * self.dim + 1
    }

    /// Bytes held by this cache plus the reference geometry it depends on.
    pub fn memory_bytes(&self) -> usize {
        let n_qp = self.n_elements * self.n_q;
        (n_qp * self.scalars_per_qpoint() + self.linearization.len()) * std::mem::size_of::<f64>()
    }
}

/// Evaluate the linearization point `u` at every quadrature point and store
/// what `strategy` needs.
///
/// Fails with [`Error::NonPositiveJacobian`] if `det F̄ ≤ 0` somewhere.
pub fn build_cache(space: &FeSpace, materials: &MaterialSet, u: &[f64], strategy: Strategy) -> Result<QuadratureCache> {
    if u.len() != space.n_dofs() {
        return Err(Error::Config(format!(
            "linearization point has {} entries, space has {} DoFs",
            u.len(),
            space.n_dofs()
        )));
    }
    match (space.dim(), strategy) {
        (_, Strategy::MatrixBased) => Err(Error::Config("the matrix-based operator has no quadrature cache".into())),
        (2, s) => build::<2>(space, materials, u, s),
        (3, s) => build::<3>(space, materials, u, s),
        (d, _) => Err(Error::Mesh(format!("unsupported dimension {d}"))),
    }
}

fn build<const D: usize>(space: &FeSpace, materials: &MaterialSet, u: &[f64], strategy: Strategy) -> Result<QuadratureCache> {
    let mesh = space.mesh();
    let geo = space.geometry();
    let sf = SumFactorization::new(space.basis(), D);
    let mut scratch = Scratch::new(space.basis(), D);
    let mut tally = FlopTally::new();
    let (npe, n_q) = (sf.n_dofs(), sf.n_q());
    let n_el = mesh.n_elements();
    let stride = strategy.payload_per_qpoint(D);
    let keeps_inverse = strategy != Strategy::Scalar;

    let mut payload = Vec::with_capacity(n_el * n_q * stride);
    let mut spatial_inverse = Vec::with_capacity(if keeps_inverse { n_el * n_q * D * D } else { 0 });
    let mut local = vec![0.0; D * npe];
    let mut grads = vec![0.0; D * D * n_q];
    let mut entry = vec![0.0; stride];
    let sym = sym_len(D);

    for e in 0..n_el {
        let model = materials.get(mesh.material(e));
        space.dofs().gather(e, u, &mut local);
        evaluate_gradients(&sf, D, &local, &mut grads, &mut scratch, &mut tally);
        for q in 0..n_q {
            let j_inv = geo.inv_jacobian::<D>(e, q);
            let grad_u = tensor::mul(&reference_gradient::<D>(&grads, n_q, q), &j_inv);
            let kin = kinematics_from_displacement_gradient(&grad_u).map_err(|inv| Error::NonPositiveJacobian {
                element: e,
                det: inv.det,
                level: None,
            })?;
            match strategy {
                Strategy::Scalar => entry[0] = model.scalar_coefficient_from_log(kin.ln_j),
                Strategy::Tensor2 => {
                    entry[0] = 2.0 * model.scalar_coefficient_from_log(kin.ln_j);
                    entry[1] = 2.0 * model.lambda;
                    pack_sym(&model.kirchhoff(&kin), &mut entry[2..2 + sym]);
                }
                Strategy::Tensor4 => {
                    pack_sym(&model.kirchhoff(&kin), &mut entry[..sym]);
                    model.spatial_tangent(&kin).pack(&mut entry[sym..]);
                }
                Strategy::MatrixBased => unreachable!(),
            }
            payload.extend_from_slice(&entry);
            if keeps_inverse {
                for row in &tensor::mul(&j_inv, &kin.f_inv) {
                    spatial_inverse.extend_from_slice(row);
                }
            }
        }
    }

    Ok(QuadratureCache {
        strategy,
        dim: D,
        n_q,
        n_elements: n_el,
        payload,
        spatial_inverse,
        linearization: if keeps_inverse { Vec::new() } else { u.to_vec() },
    })
}
