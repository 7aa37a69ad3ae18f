//! Sum-factorization kernels for tensor-product elements.
//!
//! A scalar field on one element is a tensor of `(p+1)^dim` nodal
//! coefficients, first direction fastest. Evaluating values or reference
//! gradients at the `q^dim` tensor quadrature points is done one direction at
//! a time, so each 1D contraction costs `O(n^{dim+1})` instead of the
//! `O(n^{2 dim})` of a direct double loop. Integration against test
//! functions is the exact transpose of evaluation.
//!
//! Reference gradients are stored direction-major: `grad[d * n_q + q]`.

use super::Basis1D;
use crate::flops::FlopTally;

/// Work buffers for one element evaluation. Not shared between threads.
#[derive(Debug, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
    aa: Vec<f64>,
    ab: Vec<f64>,
    ba: Vec<f64>,
}

impl Scratch {
    pub fn new(basis: &Basis1D, dim: usize) -> Self {
        let m = basis.n_dofs_1d().max(basis.n_q_1d()).pow(dim as u32);
        Scratch {
            a: vec![0.0; m],
            b: vec![0.0; m],
            aa: vec![0.0; m],
            ab: vec![0.0; m],
            ba: vec![0.0; m],
        }
    }
}

/// Which 1D table to contract with.
#[derive(Clone, Copy)]
enum Table {
    Value,
    Derivative,
}

pub struct SumFactorization<'a> {
    basis: &'a Basis1D,
    dim: usize,
    n: usize,
    nq: usize,
}

impl<'a> SumFactorization<'a> {
    pub fn new(basis: &'a Basis1D, dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "sum factorization is implemented for 2D and 3D");
        SumFactorization {
            basis,
            dim,
            n: basis.n_dofs_1d(),
            nq: basis.n_q_1d(),
        }
    }

    /// Scalar nodal coefficients per element.
    pub fn n_dofs(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Quadrature points per element.
    pub fn n_q(&self) -> usize {
        self.nq.pow(self.dim as u32)
    }

    /// Contract direction `dir` of `input` (extents `shape`) with the
    /// forward (`n_q × n`) table.
    fn forward(&self, t: Table, input: &[f64], shape: [usize; 3], dir: usize, out: &mut [f64], acc: bool, tally: &mut FlopTally) {
        let m = match t {
            Table::Value => self.basis.values(),
            Table::Derivative => self.basis.derivatives(),
        };
        contract(m, self.nq, self.n, input, shape, dir, out, acc, tally);
    }

    /// Contract with the transposed (`n × n_q`) table.
    fn backward(&self, t: Table, input: &[f64], shape: [usize; 3], dir: usize, out: &mut [f64], acc: bool, tally: &mut FlopTally) {
        let m = match t {
            Table::Value => self.basis.values_t(),
            Table::Derivative => self.basis.derivatives_t(),
        };
        contract(m, self.n, self.nq, input, shape, dir, out, acc, tally);
    }

    /// Values and/or reference gradients of the field `u` at all quadrature
    /// points.
    pub fn evaluate(
        &self,
        u: &[f64],
        values: Option<&mut [f64]>,
        gradients: Option<&mut [f64]>,
        s: &mut Scratch,
        tally: &mut FlopTally,
    ) {
        use Table::*;
        let (n, nq) = (self.n, self.nq);
        let nqt = self.n_q();
        debug_assert_eq!(u.len(), self.n_dofs());
        match self.dim {
            2 => {
                let s0 = [n, n, 1];
                let s1 = [nq, n, 1];
                self.forward(Value, u, s0, 0, &mut s.a, false, tally);
                if let Some(v) = values {
                    self.forward(Value, &s.a, s1, 1, v, false, tally);
                }
                if let Some(g) = gradients {
                    self.forward(Derivative, u, s0, 0, &mut s.b, false, tally);
                    let (g0, g1) = g.split_at_mut(nqt);
                    self.forward(Value, &s.b, s1, 1, g0, false, tally);
                    self.forward(Derivative, &s.a, s1, 1, &mut g1[..nqt], false, tally);
                }
            }
            3 => {
                let s0 = [n, n, n];
                let s1 = [nq, n, n];
                let s2 = [nq, nq, n];
                self.forward(Value, u, s0, 0, &mut s.a, false, tally);
                self.forward(Value, &s.a, s1, 1, &mut s.aa, false, tally);
                if let Some(v) = values {
                    self.forward(Value, &s.aa, s2, 2, v, false, tally);
                }
                if let Some(g) = gradients {
                    self.forward(Derivative, u, s0, 0, &mut s.b, false, tally);
                    self.forward(Value, &s.b, s1, 1, &mut s.ba, false, tally);
                    self.forward(Derivative, &s.a, s1, 1, &mut s.ab, false, tally);
                    let (g0, rest) = g.split_at_mut(nqt);
                    let (g1, g2) = rest.split_at_mut(nqt);
                    self.forward(Value, &s.ba, s2, 2, g0, false, tally);
                    self.forward(Value, &s.ab, s2, 2, g1, false, tally);
                    self.forward(Derivative, &s.aa, s2, 2, &mut g2[..nqt], false, tally);
                }
            }
            _ => unreachable!(),
        }
    }

    /// Test-function integration, the transpose of [`evaluate`](Self::evaluate):
    /// `out_i = Σ_q N_i(ξ_q) v_q + Σ_q Σ_d ∂_d N_i(ξ_q) g_{d,q}`.
    ///
    /// Quadrature weights are expected to be folded into `values`/`gradients`.
    /// `out` is overwritten.
    pub fn integrate(
        &self,
        values: Option<&[f64]>,
        gradients: Option<&[f64]>,
        out: &mut [f64],
        s: &mut Scratch,
        tally: &mut FlopTally,
    ) {
        use Table::*;
        let (n, nq) = (self.n, self.nq);
        let nqt = self.n_q();
        debug_assert_eq!(out.len(), self.n_dofs());
        if values.is_none() && gradients.is_none() {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        match self.dim {
            2 => {
                let sq = [nq, nq, 1];
                let s1 = [nq, n, 1];
                let mut have_a = false;
                if let Some(v) = values {
                    self.backward(Value, v, sq, 1, &mut s.a, false, tally);
                    have_a = true;
                }
                if let Some(g) = gradients {
                    let (g0, g1) = (&g[..nqt], &g[nqt..2 * nqt]);
                    self.backward(Derivative, g1, sq, 1, &mut s.a, have_a, tally);
                    self.backward(Value, g0, sq, 1, &mut s.b, false, tally);
                    self.backward(Derivative, &s.b, s1, 0, out, false, tally);
                    self.backward(Value, &s.a, s1, 0, out, true, tally);
                } else if have_a {
                    self.backward(Value, &s.a, s1, 0, out, false, tally);
                }
            }
            3 => {
                let sq = [nq, nq, nq];
                let s2 = [nq, nq, n];
                let s1 = [nq, n, n];
                let mut have_aa = false;
                if let Some(v) = values {
                    self.backward(Value, v, sq, 2, &mut s.aa, false, tally);
                    have_aa = true;
                }
                if let Some(g) = gradients {
                    let (g0, g1, g2) = (&g[..nqt], &g[nqt..2 * nqt], &g[2 * nqt..3 * nqt]);
                    self.backward(Derivative, g2, sq, 2, &mut s.aa, have_aa, tally);
                    self.backward(Value, g1, sq, 2, &mut s.ab, false, tally);
                    self.backward(Value, g0, sq, 2, &mut s.ba, false, tally);
                    // A = N1ᵀ AA + D1ᵀ AB ;  B = N1ᵀ BA
                    self.backward(Value, &s.aa, s2, 1, &mut s.a, false, tally);
                    self.backward(Derivative, &s.ab, s2, 1, &mut s.a, true, tally);
                    self.backward(Value, &s.ba, s2, 1, &mut s.b, false, tally);
                    self.backward(Value, &s.a, s1, 0, out, false, tally);
                    self.backward(Derivative, &s.b, s1, 0, out, true, tally);
                } else if have_aa {
                    self.backward(Value, &s.aa, s2, 1, &mut s.a, false, tally);
                    self.backward(Value, &s.a, s1, 0, out, false, tally);
                }
            }
            _ => unreachable!(),
        }
    }
}

/// `out[.., i, ..] (+)= Σ_j m[i][j] · input[.., j, ..]` along direction `dir`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn contract(
    m: &[f64],
    rows: usize,
    cols: usize,
    input: &[f64],
    shape: [usize; 3],
    dir: usize,
    out: &mut [f64],
    acc: bool,
    tally: &mut FlopTally,
) {
    debug_assert_eq!(shape[dir], cols);
    let pre: usize = shape[..dir].iter().product();
    let post: usize = shape[dir + 1..].iter().product();
    tally.add((2 * rows * cols * pre * post) as u64);
    if pre == 1 {
        for k in 0..post {
            let inp = &input[k * cols..(k + 1) * cols];
            for i in 0..rows {
                let row = &m[i * cols..(i + 1) * cols];
                let s: f64 = row.iter().zip(inp).map(|(a, b)| a * b).sum();
                let o = &mut out[k * rows + i];
                if acc {
                    *o += s;
                } else {
                    *o = s;
                }
            }
        }
        return;
    }
    for k in 0..post {
        for i in 0..rows {
            let o = &mut out[(k * rows + i) * pre..(k * rows + i + 1) * pre];
            if !acc {
                o.iter_mut().for_each(|x| *x = 0.0);
            }
            for j in 0..cols {
                let mij = m[i * cols + j];
                let inp = &input[(k * cols + j) * pre..(k * cols + j + 1) * pre];
                for (x, y) in o.iter_mut().zip(inp) {
                    *x += mij * y;
                }
            }
        }
    }
}
