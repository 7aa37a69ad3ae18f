use super::{
    assemble_matrix, build_cache, evaluate_gradients, integrate_gradients, reference_gradient, store_gradient,
    AssembledMatrix, Execution, QuadratureCache, Strategy,
};
use crate::error::Result;
use crate::fespace::{distribute_local_to_global, FeSpace, Scratch, SumFactorization};
use crate::flops::FlopTally;
use crate::linalg::LinearOperator;
use crate::material::{contract_packed, MaterialSet};
use crate::tensor::{self, sym_len, unpack_sym, Mat};
use rayon::prelude::*;
use std::sync::Arc;

/// Elements whose local results are buffered before the ordered scatter.
const CHUNK: usize = 256;

/// Per-thread work buffers of the element kernel.
struct Work {
    scratch: Scratch,
    x: Vec<f64>,
    grads: Vec<f64>,
    ubar: Vec<f64>,
    ubar_grads: Vec<f64>,
}

impl Work {
    fn new(space: &FeSpace) -> Self {
        let dim = space.dim();
        let sf = SumFactorization::new(space.basis(), dim);
        Work {
            scratch: Scratch::new(space.basis(), dim),
            x: vec![0.0; dim * sf.n_dofs()],
            grads: vec![0.0; dim * dim * sf.n_q()],
            ubar: vec![0.0; dim * sf.n_dofs()],
            ubar_grads: vec![0.0; dim * dim * sf.n_q()],
        }
    }
}

/// Matrix-free tangent `K(ū)` of one of the three caching strategies.
///
/// Constrained DoFs are eliminated symmetrically: their input entries are
/// ignored and the output there is the input (identity rows and columns).
#[derive(Debug, Clone)]
pub struct MatrixFreeTangent {
    space: Arc<FeSpace>,
    materials: MaterialSet,
    cache: QuadratureCache,
    execution: Execution,
}

impl MatrixFreeTangent {
    pub fn new(space: Arc<FeSpace>, materials: MaterialSet, u: &[f64], strategy: Strategy) -> Result<Self> {
        let cache = build_cache(&space, &materials, u, strategy)?;
        Ok(MatrixFreeTangent {
            space,
            materials,
            cache,
            execution: Execution::Sequential,
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn strategy(&self) -> Strategy {
        self.cache.strategy()
    }

    pub fn cache(&self) -> &QuadratureCache {
        &self.cache
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn memory_bytes(&self) -> usize {
        self.cache.memory_bytes()
    }

    /// `y = K x`, adding the floating-point operations to `tally`.
    pub fn apply_counted(&self, x: &[f64], y: &mut [f64], tally: &mut FlopTally) {
        let constraints = self.space.constraints();
        let mut xm = x.to_vec();
        for &d in constraints.dofs() {
            xm[d] = 0.0;
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        match self.space.dim() {
            2 => self.run::<2>(&xm, y, tally),
            _ => self.run::<3>(&xm, y, tally),
        }
        for &d in constraints.dofs() {
            y[d] = x[d];
        }
    }

    fn run<const D: usize>(&self, x: &[f64], y: &mut [f64], tally: &mut FlopTally) {
        let space = &*self.space;
        let n_el = space.mesh().n_elements();
        let n_local = D * space.dofs().nodes_per_element();
        let mut buf = vec![0.0; CHUNK.min(n_el) * n_local];
        let mut work = Work::new(space);
        for start in (0..n_el).step_by(CHUNK) {
            let end = (start + CHUNK).min(n_el);
            let outs = &mut buf[..(end - start) * n_local];
            match self.execution {
                Execution::Sequential => {
                    for (i, out) in outs.chunks_mut(n_local).enumerate() {
                        space.dofs().gather(start + i, x, &mut work.x);
                        self.element_apply::<D>(start + i, &mut work, out, tally);
                    }
                }
                Execution::Parallel => {
                    let flops: u64 = outs
                        .par_chunks_mut(n_local)
                        .enumerate()
                        .map_init(
                            || Work::new(space),
                            |w, (i, out)| {
                                let mut t = FlopTally::new();
                                space.dofs().gather(start + i, x, &mut w.x);
                                self.element_apply::<D>(start + i, w, out, &mut t);
                                t.get()
                            },
                        )
                        .sum();
                    tally.add(flops);
                }
            }
            for (i, out) in outs.chunks(n_local).enumerate() {
                distribute_local_to_global(out, start + i, space.dofs(), space.constraints(), y);
            }
        }
    }

    /// Element kernel: local input in `w.x`, local output in `out`.
    fn element_apply<const D: usize>(&self, e: usize, w: &mut Work, out: &mut [f64], tally: &mut FlopTally) {
        let space = &*self.space;
        let geo = space.geometry();
        let sf = SumFactorization::new(space.basis(), D);
        let n_q = sf.n_q();
        let strategy = self.cache.strategy();
        let sym = sym_len(D);
        let model = self.materials.get(space.mesh().material(e));

        evaluate_gradients(&sf, D, &w.x, &mut w.grads, &mut w.scratch, tally);
        if strategy == Strategy::Scalar {
            space.dofs().gather(e, self.cache.linearization(), &mut w.ubar);
            evaluate_gradients(&sf, D, &w.ubar, &mut w.ubar_grads, &mut w.scratch, tally);
        }

        let d = D as u64;
        let matmul = 2 * d * d * d;
        let mut qp_flops = 3 * matmul + 3 * d * d;
        qp_flops += match strategy {
            // Grad ū, F̄, det, inverse, b̄, τ̄ and K
            Strategy::Scalar => 3 * matmul + 2 * d * d + 4 * d * d + 2 * d,
            Strategy::Tensor2 => 2 * d * d + 2 * d,
            _ => 2 * (sym * sym) as u64,
        };

        for q in 0..n_q {
            let g_ref = reference_gradient::<D>(&w.grads, n_q, q);
            let entry = self.cache.payload(e, q);
            let (k, tau) = match strategy {
                Strategy::Scalar => {
                    let j_inv = geo.inv_jacobian::<D>(e, q);
                    let h = tensor::mul(&reference_gradient::<D>(&w.ubar_grads, n_q, q), &j_inv);
                    let mut f = h;
                    // τ̄ = μ (b̄ − I) + (μ − c1) I with b̄ − I = H + Hᵀ + H Hᵀ
                    let mut t = tensor::mul_bt(&h, &h);
                    for a in 0..D {
                        f[a][a] += 1.0;
                        for b in 0..D {
                            t[a][b] = model.mu * (t[a][b] + h[a][b] + h[b][a]);
                        }
                        t[a][a] += model.mu - entry[0];
                    }
                    (tensor::mul(&j_inv, &tensor::inverse(&f)), t)
                }
                Strategy::Tensor2 => (self.cache.spatial_inverse::<D>(e, q), unpack_sym::<D>(&entry[2..2 + sym])),
                _ => (self.cache.spatial_inverse::<D>(e, q), unpack_sym::<D>(&entry[..sym])),
            };
            let g = tensor::mul(&g_ref, &k);
            let gs = tensor::sym(&g);
            let mut t = match strategy {
                Strategy::Scalar => closed_form(&gs, 2.0 * entry[0], 2.0 * model.lambda),
                Strategy::Tensor2 => closed_form(&gs, entry[0], entry[1]),
                _ => contract_packed::<D>(&entry[sym..], &gs),
            };
            let g_tau = tensor::mul(&g, &tau);
            let jxw = geo.jxw(e, q);
            for a in 0..D {
                for b in 0..D {
                    t[a][b] += g_tau[a][b];
                }
            }
            let qm = tensor::scale(&tensor::mul_bt(&t, &k), jxw);
            store_gradient::<D>(&mut w.grads, n_q, q, &qm);
        }
        tally.add(qp_flops * n_q as u64);

        integrate_gradients(&sf, D, &w.grads, out, &mut w.scratch, tally);
    }

    /// Diagonal of the operator (1 on constrained DoFs), computed by
    /// applying each element kernel to local unit vectors.
    pub fn diagonal(&self) -> Vec<f64> {
        let space = &*self.space;
        let n_local = space.dim() * space.dofs().nodes_per_element();
        let mut diag = vec![0.0; space.n_dofs()];
        let mut work = Work::new(space);
        let mut out = vec![0.0; n_local];
        let mut local_diag = vec![0.0; n_local];
        let mut tally = FlopTally::new();
        for e in 0..space.mesh().n_elements() {
            for k in 0..n_local {
                work.x.iter_mut().for_each(|v| *v = 0.0);
                work.x[k] = 1.0;
                match space.dim() {
                    2 => self.element_apply::<2>(e, &mut work, &mut out, &mut tally),
                    _ => self.element_apply::<3>(e, &mut work, &mut out, &mut tally),
                }
                local_diag[k] = out[k];
            }
            distribute_local_to_global(&local_diag, e, space.dofs(), space.constraints(), &mut diag);
        }
        for &d in space.constraints().dofs() {
            diag[d] = 1.0;
        }
        diag
    }
}

#[inline]
fn closed_form<const D: usize>(gs: &Mat<D>, c1: f64, c2: f64) -> Mat<D> {
    let tr = tensor::trace(gs);
    let mut r = tensor::scale(gs, c1);
    for (i, row) in r.iter_mut().enumerate() {
        row[i] += c2 * tr;
    }
    r
}

impl LinearOperator for MatrixFreeTangent {
    fn n(&self) -> usize {
        self.space.n_dofs()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = FlopTally::new();
        self.apply_counted(x, y, &mut t);
    }
}

/// The tangent at `ū`, either matrix-free or assembled.
#[derive(Debug, Clone)]
pub enum TangentOperator {
    MatrixFree(MatrixFreeTangent),
    Assembled(AssembledMatrix),
}

impl TangentOperator {
    pub fn build(
        space: Arc<FeSpace>,
        materials: &MaterialSet,
        u: &[f64],
        strategy: Strategy,
        execution: Execution,
    ) -> Result<Self> {
        if strategy.is_matrix_free() {
            Ok(TangentOperator::MatrixFree(
                MatrixFreeTangent::new(space, *materials, u, strategy)?.with_execution(execution),
            ))
        } else {
            Ok(TangentOperator::Assembled(assemble_matrix(&space, materials, u)?))
        }
    }

    pub fn strategy(&self) -> Strategy {
        match self {
            TangentOperator::MatrixFree(op) => op.strategy(),
            TangentOperator::Assembled(_) => Strategy::MatrixBased,
        }
    }

    pub fn apply_counted(&self, x: &[f64], y: &mut [f64], tally: &mut FlopTally) {
        match self {
            TangentOperator::MatrixFree(op) => op.apply_counted(x, y, tally),
            TangentOperator::Assembled(m) => m.apply_counted(x, y, tally),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        match self {
            TangentOperator::MatrixFree(op) => op.diagonal(),
            TangentOperator::Assembled(m) => m.matrix().diagonal(),
        }
    }

    /// Bytes of operator data (quadrature caches or the CSR arrays).
    pub fn memory_bytes(&self) -> usize {
        match self {
            TangentOperator::MatrixFree(op) => op.memory_bytes(),
            TangentOperator::Assembled(m) => m.matrix().memory_bytes(),
        }
    }
}

impl LinearOperator for TangentOperator {
    fn n(&self) -> usize {
        match self {
            TangentOperator::MatrixFree(op) => op.n(),
            TangentOperator::Assembled(m) => m.matrix().n_rows(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = FlopTally::new();
        self.apply_counted(x, y, &mut t);
    }
}
