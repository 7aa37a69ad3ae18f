use super::{corner_shape, Mesh};
use crate::error::{Error, Result};
use crate::fespace::Quadrature1D;
use crate::tensor::{self, Mat};

/// Inverse reference-mapping Jacobians and `det(J)·w` per element and
/// tensor-product quadrature point (first direction fastest).
#[derive(Debug, Clone)]
pub struct GeometryCache {
    dim: usize,
    n_q: usize,
    inv_jacobian: Vec<f64>,
    jxw: Vec<f64>,
}

impl GeometryCache {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Quadrature points per element.
    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn n_elements(&self) -> usize {
        self.jxw.len() / self.n_q
    }

    #[inline]
    pub fn jxw(&self, element: usize, q: usize) -> f64 {
        self.jxw[element * self.n_q + q]
    }

    pub fn jxw_element(&self, element: usize) -> &[f64] {
        &self.jxw[element * self.n_q..(element + 1) * self.n_q]
    }

    #[inline]
    pub fn inv_jacobian<const D: usize>(&self, element: usize, q: usize) -> Mat<D> {
        debug_assert_eq!(D, self.dim);
        let off = (element * self.n_q + q) * D * D;
        let mut m = tensor::zero::<D>();
        for i in 0..D {
            for j in 0..D {
                m[i][j] = self.inv_jacobian[off + i * D + j];
            }
        }
        m
    }

    /// Sum of all `JxW`, i.e. the measure of the meshed domain.
    pub fn measure(&self) -> f64 {
        self.jxw.iter().sum()
    }

    pub fn memory_bytes(&self) -> usize {
        (self.inv_jacobian.len() + self.jxw.len()) * std::mem::size_of::<f64>()
    }
}

/// Jacobian `∂x/∂ξ` of the multilinear map of `element` at `xi`.
pub fn jacobian_at<const D: usize>(mesh: &Mesh, element: usize, xi: &[f64]) -> Mat<D> {
    let coords = mesh.corner_coords(element);
    let mut jac = tensor::zero::<D>();
    for (c, x) in coords.iter().enumerate().take(1 << D) {
        let (_, g) = corner_shape(D, c, xi);
        for a in 0..D {
            for d in 0..D {
                jac[a][d] += x[a] * g[d];
            }
        }
    }
    jac
}

/// Physical position of reference point `xi` in `element`.
pub fn map_point(mesh: &Mesh, element: usize, xi: &[f64]) -> [f64; 3] {
    let dim = mesh.dim();
    let coords = mesh.corner_coords(element);
    let mut x = [0.0; 3];
    for (c, cx) in coords.iter().enumerate().take(1 << dim) {
        let (w, _) = corner_shape(dim, c, xi);
        for d in 0..3 {
            x[d] += w * cx[d];
        }
    }
    x
}

/// Cache `J_geo⁻¹` and `JxW` at every quadrature point of `mesh`.
///
/// Fails with [`Error::NonPositiveJacobian`] if some element is inverted or
/// degenerate at a quadrature point.
pub fn compute_geometry_cache(mesh: &Mesh, quad: &Quadrature1D) -> Result<GeometryCache> {
    match mesh.dim() {
        2 => compute::<2>(mesh, quad),
        3 => compute::<3>(mesh, quad),
        d => Err(Error::Mesh(format!("unsupported dimension {d}"))),
    }
}

fn compute<const D: usize>(mesh: &Mesh, quad: &Quadrature1D) -> Result<GeometryCache> {
    let nq1 = quad.len();
    let n_q = nq1.pow(D as u32);
    let n_el = mesh.n_elements();
    let mut inv_jacobian = Vec::with_capacity(n_el * n_q * D * D);
    let mut jxw = Vec::with_capacity(n_el * n_q);
    for e in 0..n_el {
        for q in 0..n_q {
            let mut xi = [0.0; 3];
            let mut w = 1.0;
            let mut rem = q;
            for x in xi.iter_mut().take(D) {
                let qd = rem % nq1;
                rem /= nq1;
                *x = quad.points()[qd];
                w *= quad.weights()[qd];
            }
            let jac = jacobian_at::<D>(mesh, e, &xi);
            let det = tensor::det(&jac);
            if !(det > 0.0) {
                return Err(Error::NonPositiveJacobian {
                    element: e,
                    det,
                    level: None,
                });
            }
            let inv = tensor::inverse(&jac);
            for row in &inv {
                inv_jacobian.extend_from_slice(row);
            }
            jxw.push(det * w);
        }
    }
    Ok(GeometryCache {
        dim: D,
        n_q,
        inv_jacobian,
        jxw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::gauss_legendre;
    use crate::mesh::{build_benchmark_mesh, MaterialId, MeshHierarchy, DOMAIN_SIDE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> Mesh {
        let verts = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        Mesh::new(2, verts, vec![0, 1, 2, 3], vec![MaterialId::Matrix], vec![]).unwrap()
    }

    #[test]
    fn unit_square_cache() {
        let g = compute_geometry_cache(&unit_square(), &gauss_legendre(2).unwrap()).unwrap();
        assert_eq!(g.n_q(), 4);
        for q in 0..4 {
            assert!((g.jxw(0, q) - 0.25).abs() < 1e-15);
            let inv = g.inv_jacobian::<2>(0, q);
            assert_eq!(inv, [[1.0, 0.0], [0.0, 1.0]]);
        }
    }

    #[test]
    fn grid_measure() {
        let s = DOMAIN_SIDE;
        for (dim, n) in [(2, 5), (3, 3)] {
            let m = build_benchmark_mesh(dim, n, &[]).unwrap();
            let g = compute_geometry_cache(&m, &gauss_legendre(3).unwrap()).unwrap();
            let expected = s.powi(dim as i32);
            assert!((g.measure() - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn perturbed_grid_measure_and_child_tiling() {
        let s = DOMAIN_SIDE;
        let n = 6;
        let mut m = build_benchmark_mesh(2, n, &[]).unwrap();
        let h = s / n as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for v in m.vertices_mut() {
            let interior = (0..2).all(|d| v[d] > 0.5 * h && v[d] < s - 0.5 * h);
            if interior {
                v[0] += rng.gen_range(-0.2..0.2) * h;
                v[1] += rng.gen_range(-0.2..0.2) * h;
            }
        }
        let quad = gauss_legendre(2).unwrap();
        let g = compute_geometry_cache(&m, &quad).unwrap();
        assert!((g.measure() - s * s).abs() <= 1e-12 * s * s);

        let mut hier = MeshHierarchy::new(m);
        hier.refine_globally(2);
        for l in 1..hier.n_levels() {
            let coarse = compute_geometry_cache(hier.level(l - 1), &quad).unwrap();
            let fine = compute_geometry_cache(hier.level(l), &quad).unwrap();
            let mut child_sum = vec![0.0; hier.level(l - 1).n_elements()];
            for (e, link) in hier.parent_links(l).iter().enumerate() {
                child_sum[link.parent] += fine.jxw_element(e).iter().sum::<f64>();
            }
            for (p, sum) in child_sum.iter().enumerate() {
                let parent: f64 = coarse.jxw_element(p).iter().sum();
                assert!((sum - parent).abs() <= 1e-12 * parent);
            }
        }
    }

    #[test]
    fn inverted_element_is_rejected() {
        let verts = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let m = Mesh::new(2, verts, vec![1, 0, 2, 3], vec![MaterialId::Matrix], vec![]).unwrap();
        let err = compute_geometry_cache(&m, &gauss_legendre(2).unwrap());
        assert!(matches!(err, Err(Error::NonPositiveJacobian { .. })));
    }
}
