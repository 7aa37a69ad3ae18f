use super::{evaluate_gradients, integrate_gradients, reference_gradient, store_gradient};
use crate::error::{Error, Result};
use crate::fespace::{distribute_local_to_global, FeSpace, Scratch, SumFactorization};
use crate::flops::FlopTally;
use crate::material::{kinematics_from_displacement_gradient, Hyperelastic, Kinematics, MaterialSet};
use crate::mesh::{jacobian_at, BoundaryId};
use crate::tensor::{self, Mat};
use serde::{Deserialize, Serialize};

/// Dead-load traction on the top face, force per unit reference area
/// (N/mm²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Traction {
    pub magnitude: f64,
    pub direction: [f64; 3],
}

impl Traction {
    pub fn new(magnitude: f64, direction: [f64; 3]) -> Self {
        Traction { magnitude, direction }
    }

    pub fn zero() -> Self {
        Traction::new(0.0, [1.0, 0.0, 0.0])
    }

    /// `12.5e3 (1, 0)` in 2D and `12.5√2 e3 (1, 1, 0)/√2` in 3D.
    pub fn benchmark(dim: usize) -> Self {
        if dim == 2 {
            Traction::new(12.5e3, [1.0, 0.0, 0.0])
        } else {
            Traction::new(12.5e3 * 2f64.sqrt(), [1.0, 1.0, 0.0])
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Traction::new(self.magnitude * factor, self.direction)
    }

    /// `magnitude · direction / |direction|`; zero for a zero direction.
    pub fn vector(&self) -> [f64; 3] {
        let len = self.direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if len == 0.0 || self.magnitude == 0.0 {
            return [0.0; 3];
        }
        self.direction.map(|d| self.magnitude * d / len)
    }
}

fn kinematics<const D: usize>(grad_u: &Mat<D>, element: usize) -> Result<Kinematics<D>> {
    kinematics_from_displacement_gradient(grad_u).map_err(|inv| Error::NonPositiveJacobian {
        element,
        det: inv.det,
        level: None,
    })
}

/// Residual `F_i = ∫ τ : grad N_i dV − ∫_top T̄ · N_i dA` over the
/// reference configuration, with constrained entries zeroed.
pub fn compute_residual(space: &FeSpace, materials: &MaterialSet, u: &[f64], traction: &Traction) -> Result<Vec<f64>> {
    check_len(space, u)?;
    match space.dim() {
        2 => residual::<2>(space, materials, u, traction),
        _ => residual::<3>(space, materials, u, traction),
    }
}

fn check_len(space: &FeSpace, u: &[f64]) -> Result<()> {
    if u.len() != space.n_dofs() {
        return Err(Error::Config(format!(
            "displacement has {} entries, space has {} DoFs",
            u.len(),
            space.n_dofs()
        )));
    }
    Ok(())
}

fn residual<const D: usize>(space: &FeSpace, materials: &MaterialSet, u: &[f64], traction: &Traction) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let geo = space.geometry();
    let sf = SumFactorization::new(space.basis(), D);
    let mut scratch = Scratch::new(space.basis(), D);
    let mut tally = FlopTally::new();
    let (npe, n_q) = (sf.n_dofs(), sf.n_q());
    let mut local = vec![0.0; D * npe];
    let mut grads = vec![0.0; D * D * n_q];
    let mut out = vec![0.0; space.n_dofs()];

    for e in 0..mesh.n_elements() {
        let model = materials.get(mesh.material(e));
        space.dofs().gather(e, u, &mut local);
        evaluate_gradients(&sf, D, &local, &mut grads, &mut scratch, &mut tally);
        for q in 0..n_q {
            let j_inv = geo.inv_jacobian::<D>(e, q);
            let grad_u = tensor::mul(&reference_gradient::<D>(&grads, n_q, q), &j_inv);
            let kin = kinematics(&grad_u, e)?;
            let k = tensor::mul(&j_inv, &kin.f_inv);
            let qm = tensor::scale(&tensor::mul_bt(&model.kirchhoff(&kin), &k), geo.jxw(e, q));
            store_gradient::<D>(&mut grads, n_q, q, &qm);
        }
        integrate_gradients(&sf, D, &grads, &mut local, &mut scratch, &mut tally);
        distribute_local_to_global(&local, e, space.dofs(), space.constraints(), &mut out);
    }

    let t = traction.vector();
    if t.iter().any(|&v| v != 0.0) {
        for_each_top_point::<D>(space, |e, weights, jxw| {
            for c in 0..D {
                for (i, w) in weights.iter().enumerate() {
                    local[c * npe + i] = -t[c] * w * jxw;
                }
            }
            distribute_local_to_global(&local, e, space.dofs(), space.constraints(), &mut out);
        });
    }
    Ok(out)
}

/// Total potential energy `Σ ∫ ψ dV − ∫_top T̄ · u dA`.
pub fn energy(space: &FeSpace, materials: &MaterialSet, u: &[f64], traction: &Traction) -> Result<f64> {
    check_len(space, u)?;
    match space.dim() {
        2 => energy_impl::<2>(space, materials, u, traction),
        _ => energy_impl::<3>(space, materials, u, traction),
    }
}

fn energy_impl<const D: usize>(space: &FeSpace, materials: &MaterialSet, u: &[f64], traction: &Traction) -> Result<f64> {
    let mesh = space.mesh();
    let geo = space.geometry();
    let sf = SumFactorization::new(space.basis(), D);
    let mut scratch = Scratch::new(space.basis(), D);
    let mut tally = FlopTally::new();
    let (npe, n_q) = (sf.n_dofs(), sf.n_q());
    let mut local = vec![0.0; D * npe];
    let mut grads = vec![0.0; D * D * n_q];
    let mut total = 0.0;

    for e in 0..mesh.n_elements() {
        let model = materials.get(mesh.material(e));
        space.dofs().gather(e, u, &mut local);
        evaluate_gradients(&sf, D, &local, &mut grads, &mut scratch, &mut tally);
        for q in 0..n_q {
            let grad_u = tensor::mul(&reference_gradient::<D>(&grads, n_q, q), &geo.inv_jacobian::<D>(e, q));
            total += model.energy(&kinematics(&grad_u, e)?) * geo.jxw(e, q);
        }
    }

    let t = traction.vector();
    if t.iter().any(|&v| v != 0.0) {
        for_each_top_point::<D>(space, |e, weights, jxw| {
            space.dofs().gather(e, u, &mut local);
            for c in 0..D {
                let uc: f64 = weights.iter().enumerate().map(|(i, w)| w * local[c * npe + i]).sum();
                total -= t[c] * uc * jxw;
            }
        });
    }
    Ok(total)
}

/// Visit every quadrature point of every top face with the element's
/// shape-function values there and the surface `JxW`.
pub(crate) fn for_each_top_point<const D: usize>(space: &FeSpace, mut f: impl FnMut(usize, &[f64], f64)) {
    let mesh = space.mesh();
    let basis = space.basis();
    let quad = basis.quadrature();
    let n1 = basis.n_dofs_1d();
    let nq1 = quad.len();
    let npe = n1.pow(D as u32);
    let mut weights = vec![0.0; npe];
    let n_face_q = nq1.pow(D as u32 - 1);

    for face in mesh.faces_with_id(BoundaryId::Top) {
        let normal_dir = face.face / 2;
        let side = (face.face % 2) as f64;
        let tangential: Vec<usize> = (0..D).filter(|&d| d != normal_dir).collect();
        for fq in 0..n_face_q {
            let mut xi = [0.0; 3];
            let mut w = 1.0;
            xi[normal_dir] = side;
            let mut rem = fq;
            for &d in &tangential {
                let k = rem % nq1;
                rem /= nq1;
                xi[d] = quad.points()[k];
                w *= quad.weights()[k];
            }
            let jac = jacobian_at::<D>(mesh, face.element, &xi[..D]);
            let col = |d: usize| -> [f64; 3] {
                let mut c = [0.0; 3];
                for a in 0..D {
                    c[a] = jac[a][d];
                }
                c
            };
            let area = if D == 2 {
                let t = col(tangential[0]);
                (t[0] * t[0] + t[1] * t[1]).sqrt()
            } else {
                let (a, b) = (col(tangential[0]), col(tangential[1]));
                let n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
                (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
            };
            for (i, wi) in weights.iter_mut().enumerate() {
                let mut v = 1.0;
                let mut rem = i;
                for x in xi.iter().take(D) {
                    v *= basis.value(rem % n1, *x);
                    rem /= n1;
                }
                *wi = v;
            }
            f(face.element, &weights, area * w);
        }
    }
}
