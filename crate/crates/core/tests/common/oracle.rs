//! Reference implementations written from the defining formulas, kept
//! independent of the library kernels.

use hyperfree::fespace::Quadrature1D;

/// Lagrange polynomial `i` on equispaced nodes and its derivative, straight
/// from the product formula.
pub fn lagrange(p: usize, i: usize, x: f64) -> (f64, f64) {
    let node = |k: usize| k as f64 / p as f64;
    let mut v = 1.0;
    for k in (0..=p).filter(|&k| k != i) {
        v *= (x - node(k)) / (node(i) - node(k));
    }
    let mut d = 0.0;
    for m in (0..=p).filter(|&m| m != i) {
        let mut t = 1.0 / (node(i) - node(m));
        for k in (0..=p).filter(|&k| k != i && k != m) {
            t *= (x - node(k)) / (node(i) - node(k));
        }
        d += t;
    }
    (v, d)
}

/// Dense tables of `N_a(ξ_q)` and `∂_d N_a(ξ_q)` for the tensor element.
pub struct Naive {
    pub n_dofs: usize,
    pub n_q: usize,
    pub dim: usize,
    pub value: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
}

impl Naive {
    pub fn new(p: usize, q: &Quadrature1D, dim: usize) -> Self {
        let n = p + 1;
        let nq = q.len();
        let n_dofs = n.pow(dim as u32);
        let n_q = nq.pow(dim as u32);
        let split = |mut k: usize, m: usize| {
            let mut out = [0; 3];
            for o in out.iter_mut().take(dim) {
                *o = k % m;
                k /= m;
            }
            out
        };
        let mut value = vec![0.0; n_q * n_dofs];
        let mut grad = vec![vec![0.0; n_q * n_dofs]; dim];
        for qi in 0..n_q {
            let qq = split(qi, nq);
            for a in 0..n_dofs {
                let aa = split(a, n);
                let vd: Vec<(f64, f64)> = (0..dim).map(|d| lagrange(p, aa[d], q.points()[qq[d]])).collect();
                value[qi * n_dofs + a] = vd.iter().map(|x| x.0).product();
                for (g, gd) in grad.iter_mut().enumerate() {
                    gd[qi * n_dofs + a] = (0..dim).map(|d| if d == g { vd[d].1 } else { vd[d].0 }).product();
                }
            }
        }
        Naive {
            n_dofs,
            n_q,
            dim,
            value,
            grad,
        }
    }

    pub fn eval(&self, table: &[f64], u: &[f64]) -> Vec<f64> {
        (0..self.n_q)
            .map(|q| (0..self.n_dofs).map(|a| table[q * self.n_dofs + a] * u[a]).sum())
            .collect()
    }

    pub fn integrate(&self, v: &[f64], g: &[f64]) -> Vec<f64> {
        (0..self.n_dofs)
            .map(|a| {
                let mut s = 0.0;
                for q in 0..self.n_q {
                    s += self.value[q * self.n_dofs + a] * v[q];
                    for d in 0..self.dim {
                        s += self.grad[d][q * self.n_dofs + a] * g[d * self.n_q + q];
                    }
                }
                s
            })
            .collect()
    }
}


/// Smallest and largest `det(I + Grad u)` over the Gauss points (`p + 1` per
/// direction) of a mesh of axis-aligned boxes, from node coordinates and the
/// product-formula basis alone.
pub fn jacobian_range(space: &hyperfree::fespace::FeSpace, u: &[f64]) -> (f64, f64) {
    let dim = space.dim();
    let p = space.degree();
    let gauss = hyperfree::fespace::gauss_legendre(p + 1).unwrap();
    let coords = space.dofs().node_coords();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for e in 0..space.mesh().n_elements() {
        let nodes = space.dofs().element_nodes(e);
        let mut x0 = [f64::INFINITY; 3];
        let mut x1 = [f64::NEG_INFINITY; 3];
        for &n in nodes {
            for d in 0..dim {
                x0[d] = x0[d].min(coords[n][d]);
                x1[d] = x1[d].max(coords[n][d]);
            }
        }
        let index = |n: usize, d: usize| ((coords[n][d] - x0[d]) / (x1[d] - x0[d]) * p as f64).round() as usize;
        let nq = gauss.len().pow(dim as u32);
        for q in 0..nq {
            let xi: Vec<f64> = (0..dim).map(|d| gauss.points()[(q / gauss.len().pow(d as u32)) % gauss.len()]).collect();
            let mut f = nalgebra::DMatrix::<f64>::identity(dim, dim);
            for &n in nodes {
                for d in 0..dim {
                    let mut g = 1.0 / (x1[d] - x0[d]);
                    for k in 0..dim {
                        let (v, dv) = lagrange(p, index(n, k), xi[k]);
                        g *= if k == d { dv } else { v };
                    }
                    for c in 0..dim {
                        f[(c, d)] += u[n * dim + c] * g;
                    }
                }
            }
            let j = f.determinant();
            lo = lo.min(j);
            hi = hi.max(j);
        }
    }
    (lo, hi)
}
