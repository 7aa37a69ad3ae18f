use crate::fespace::FeSpace;
use crate::mesh::ParentLink;
use crate::sparse::CsrMatrix;

/// Grid transfer between two nested degree-`p` spaces on consecutive
/// refinement levels.
///
/// The prolongation is the embedding of the coarse space into the fine one,
/// stored as a scalar node-to-node matrix and applied per component.
/// Restriction is its transpose. Constrained entries are zeroed on output.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    components: usize,
    prolongation: CsrMatrix,
    restriction: CsrMatrix,
    /// `injection[j]` is the fine node at the position of coarse node `j`.
    injection: Vec<usize>,
    coarse_constrained: Vec<usize>,
    fine_constrained: Vec<usize>,
}

/// Multi-index of the lexicographic local node `i` (first direction fastest).
fn split(mut i: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut out = [0; 3];
    for o in out.iter_mut().take(dim) {
        *o = i % n;
        i /= n;
    }
    out
}

impl TransferOperator {
    /// `links[e]` locates fine element `e` inside its coarse parent.
    pub fn new(coarse: &FeSpace, fine: &FeSpace, links: &[ParentLink]) -> Self {
        let dim = fine.dim();
        let basis = coarse.basis();
        let p = basis.degree();
        let n1 = p + 1;
        let nchildren = 1 << dim;
        assert_eq!(links.len(), fine.mesh().n_elements(), "one parent link per fine element");
        assert_eq!(p, fine.degree(), "transfer requires equal polynomial degrees");

        let mut child_of = vec![usize::MAX; coarse.mesh().n_elements() * nchildren];
        for (e, l) in links.iter().enumerate() {
            child_of[l.parent * nchildren + l.child] = e;
        }

        let mut triplets = Vec::new();
        let mut seen = vec![false; fine.dofs().n_nodes()];
        for (e, link) in links.iter().enumerate() {
            let fine_nodes = fine.dofs().element_nodes(e);
            let coarse_nodes = coarse.dofs().element_nodes(link.parent);
            for (i, &fnode) in fine_nodes.iter().enumerate() {
                if std::mem::replace(&mut seen[fnode], true) {
                    continue;
                }
                let ii = split(i, n1, dim);
                let mut xi = [0.0; 3];
                for d in 0..dim {
                    let bit = ((link.child >> d) & 1) as f64;
                    xi[d] = 0.5 * (bit + ii[d] as f64 / p as f64);
                }
                let vals: Vec<Vec<f64>> = (0..dim).map(|d| (0..n1).map(|k| basis.value(k, xi[d])).collect()).collect();
                for (j, &cnode) in coarse_nodes.iter().enumerate() {
                    let jj = split(j, n1, dim);
                    let w: f64 = (0..dim).map(|d| vals[d][jj[d]]).product();
                    if w.abs() > 1e-13 {
                        triplets.push((fnode, cnode, w));
                    }
                }
            }
        }
        let prolongation = CsrMatrix::from_triplets(fine.dofs().n_nodes(), coarse.dofs().n_nodes(), &triplets);
        let restriction = prolongation.transpose();

        let mut injection = vec![usize::MAX; coarse.dofs().n_nodes()];
        for ce in 0..coarse.mesh().n_elements() {
            for (j, &cnode) in coarse.dofs().element_nodes(ce).iter().enumerate() {
                if injection[cnode] != usize::MAX {
                    continue;
                }
                let jj = split(j, n1, dim);
                let mut child = 0;
                let mut fine_local = 0;
                let mut stride = 1;
                for d in 0..dim {
                    let upper = 2 * jj[d] > p;
                    child |= (upper as usize) << d;
                    let idx = if upper { 2 * jj[d] - p } else { 2 * jj[d] };
                    fine_local += idx * stride;
                    stride *= n1;
                }
                let fe = child_of[ce * nchildren + child];
                injection[cnode] = fine.dofs().element_nodes(fe)[fine_local];
            }
        }

        TransferOperator {
            components: fine.dofs().components(),
            prolongation,
            restriction,
            injection,
            coarse_constrained: coarse.constraints().dofs().to_vec(),
            fine_constrained: fine.constraints().dofs().to_vec(),
        }
    }

    pub fn n_coarse(&self) -> usize {
        self.prolongation.n_cols() * self.components
    }

    pub fn n_fine(&self) -> usize {
        self.prolongation.n_rows() * self.components
    }

    /// Scalar node-to-node prolongation matrix.
    pub fn prolongation_matrix(&self) -> &CsrMatrix {
        &self.prolongation
    }

    /// `fine += P coarse`, constrained fine entries untouched.
    pub fn prolongate_add(&self, coarse: &[f64], fine: &mut [f64]) {
        let mut tmp = vec![0.0; fine.len()];
        self.prolongate(coarse, &mut tmp);
        for (f, t) in fine.iter_mut().zip(&tmp) {
            *f += t;
        }
    }

    /// `fine = P coarse` with constrained fine entries zeroed.
    pub fn prolongate(&self, coarse: &[f64], fine: &mut [f64]) {
        apply_blocked(&self.prolongation, self.components, coarse, fine);
        for &d in &self.fine_constrained {
            fine[d] = 0.0;
        }
    }

    /// `coarse = Pᵀ fine` with constrained coarse entries zeroed.
    pub fn restrict(&self, fine: &[f64], coarse: &mut [f64]) {
        apply_blocked(&self.restriction, self.components, fine, coarse);
        for &d in &self.coarse_constrained {
            coarse[d] = 0.0;
        }
    }

    /// Nodal injection of a fine field onto the coarse nodes; constrained
    /// coarse entries are set to their prescribed value 0.
    pub fn inject(&self, fine: &[f64], coarse: &mut [f64]) {
        let nc = self.components;
        for (j, &k) in self.injection.iter().enumerate() {
            coarse[j * nc..(j + 1) * nc].copy_from_slice(&fine[k * nc..(k + 1) * nc]);
        }
        for &d in &self.coarse_constrained {
            coarse[d] = 0.0;
        }
    }
}

/// `y = (M ⊗ I_nc) x` for node-major vectors with `nc` components.
fn apply_blocked(m: &CsrMatrix, nc: usize, x: &[f64], y: &mut [f64]) {
    for r in 0..m.n_rows() {
        let (cols, vals) = m.row(r);
        for c in 0..nc {
            let mut s = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                s += v * x[j * nc + c];
            }
            y[r * nc + c] = s;
        }
    }
}
