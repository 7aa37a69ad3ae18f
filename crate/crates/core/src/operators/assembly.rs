use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::flops::FlopTally;
use crate::linalg::LinearOperator;
use crate::material::{kinematics_from_displacement_gradient, Hyperelastic, MaterialSet};
use crate::sparse::CsrMatrix;
use crate::tensor::{self, Mat};

/// Sparse tangent matrix with identity rows and columns on constrained DoFs.
#[derive(Debug, Clone)]
pub struct AssembledMatrix {
    matrix: CsrMatrix,
}

impl AssembledMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.matrix
    }

    pub fn apply_counted(&self, x: &[f64], y: &mut [f64], tally: &mut FlopTally) {
        self.matrix.mul_vec(x, y);
        tally.add(2 * self.matrix.nnz() as u64);
    }
}

impl LinearOperator for AssembledMatrix {
    fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul_vec(x, y)
    }
}

/// Assemble the tangent at `u` from dense element matrices computed by
/// plain quadrature loops (no sum factorization) and the general
/// fourth-order material tangent.
pub fn assemble_matrix(space: &FeSpace, materials: &MaterialSet, u: &[f64]) -> Result<AssembledMatrix> {
    if u.len() != space.n_dofs() {
        return Err(Error::Config(format!(
            "linearization point has {} entries, space has {} DoFs",
            u.len(),
            space.n_dofs()
        )));
    }
    match space.dim() {
        2 => assemble::<2>(space, materials, u),
        _ => assemble::<3>(space, materials, u),
    }
}

/// Sparsity pattern: DoFs coupled through a shared element.
fn pattern(space: &FeSpace) -> CsrMatrix {
    let dofs = space.dofs();
    let nc = dofs.components();
    let mut node_adj: Vec<Vec<usize>> = vec![Vec::new(); dofs.n_nodes()];
    for e in 0..dofs.n_elements() {
        let nodes = dofs.element_nodes(e);
        for &a in nodes {
            node_adj[a].extend_from_slice(nodes);
        }
    }
    let mut rows = Vec::with_capacity(dofs.n_dofs());
    for adj in node_adj.iter_mut() {
        adj.sort_unstable();
        adj.dedup();
        let cols: Vec<usize> = adj.iter().flat_map(|&b| (0..nc).map(move |c| b * nc + c)).collect();
        for _ in 0..nc {
            rows.push(cols.clone());
        }
    }
    CsrMatrix::from_pattern(dofs.n_dofs(), rows)
}

fn assemble<const D: usize>(space: &FeSpace, materials: &MaterialSet, u: &[f64]) -> Result<AssembledMatrix> {
    let mesh = space.mesh();
    let geo = space.geometry();
    let basis = space.basis();
    let dofs = space.dofs();
    let constraints = space.constraints();
    let n1 = basis.n_dofs_1d();
    let nq1 = basis.n_q_1d();
    let npe = dofs.nodes_per_element();
    let n_q = nq1.pow(D as u32);
    let n_local = D * npe;

    // ∂N_i/∂ξ_d at every quadrature point, by direct products of 1D tables.
    let mut ref_grad = vec![[0.0; D]; n_q * npe];
    for q in 0..n_q {
        let qi = split(q, nq1, D);
        for i in 0..npe {
            let ii = split(i, n1, D);
            for d in 0..D {
                let mut v = 1.0;
                for k in 0..D {
                    let idx = qi[k] * n1 + ii[k];
                    v *= if k == d { basis.derivatives()[idx] } else { basis.values()[idx] };
                }
                ref_grad[q * npe + i][d] = v;
            }
        }
    }

    let mut matrix = pattern(space);
    let mut local = vec![0.0; n_local * n_local];
    let mut ulocal = vec![0.0; n_local];
    let mut grad_x = vec![[0.0; D]; npe];
    let mut stress_of = vec![tensor::zero::<D>(); n_local];

    for e in 0..mesh.n_elements() {
        let model = materials.get(mesh.material(e));
        dofs.gather(e, u, &mut ulocal);
        local.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..n_q {
            let j_inv = geo.inv_jacobian::<D>(e, q);
            let mut g_ref = tensor::zero::<D>();
            for i in 0..npe {
                for a in 0..D {
                    for d in 0..D {
                        g_ref[a][d] += ulocal[a * npe + i] * ref_grad[q * npe + i][d];
                    }
                }
            }
            let grad_u = tensor::mul(&g_ref, &j_inv);
            let kin = kinematics_from_displacement_gradient(&grad_u).map_err(|inv| Error::NonPositiveJacobian {
                element: e,
                det: inv.det,
                level: None,
            })?;
            let tau = model.kirchhoff(&kin);
            let c = model.spatial_tangent(&kin);
            let k = tensor::mul(&j_inv, &kin.f_inv);
            let jxw = geo.jxw(e, q);

            for i in 0..npe {
                for b in 0..D {
                    grad_x[i][b] = (0..D).map(|d| ref_grad[q * npe + i][d] * k[d][b]).sum();
                }
            }
            // J𝒞 : sym(e_a ⊗ ∇N_i) for every local basis function
            for a in 0..D {
                for i in 0..npe {
                    let mut g: Mat<D> = tensor::zero();
                    g[a] = grad_x[i];
                    stress_of[a * npe + i] = c.contract(&tensor::sym(&g));
                }
            }
            for a in 0..D {
                for i in 0..npe {
                    let row = a * npe + i;
                    for b in 0..D {
                        for j in 0..npe {
                            let col = b * npe + j;
                            // (J𝒞 : grad^s N_j) : grad N_i
                            let s = &stress_of[col];
                            let mut v: f64 = (0..D).map(|m| s[a][m] * grad_x[i][m]).sum();
                            if a == b {
                                let mut geo_term = 0.0;
                                for m in 0..D {
                                    for n in 0..D {
                                        geo_term += grad_x[i][m] * tau[m][n] * grad_x[j][n];
                                    }
                                }
                                v += geo_term;
                            }
                            local[row * n_local + col] += v * jxw;
                        }
                    }
                }
            }
        }

        let nodes = dofs.element_nodes(e);
        let global = |l: usize| nodes[l % npe] * D + l / npe;
        for r in 0..n_local {
            let gr = global(r);
            if constraints.is_constrained(gr) {
                continue;
            }
            for cidx in 0..n_local {
                let gc = global(cidx);
                if constraints.is_constrained(gc) {
                    continue;
                }
                *matrix.entry_mut(gr, gc).expect("entry in sparsity pattern") += local[r * n_local + cidx];
            }
        }
    }
    for &d in constraints.dofs() {
        *matrix.entry_mut(d, d).expect("diagonal in sparsity pattern") = 1.0;
    }
    Ok(AssembledMatrix { matrix })
}

/// Lexicographic multi-index of `i` with extent `n` per direction.
fn split(mut i: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut out = [0; 3];
    for o in out.iter_mut().take(dim) {
        *o = i % n;
        i /= n;
    }
    out
}
