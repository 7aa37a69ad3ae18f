//! Tensor-product (quad/hex) meshes, global refinement and per-element
//! geometry.
//!
//! Local vertex order is lexicographic: corner `c` has reference coordinate
//! `ξ_d = (c >> d) & 1`. Local faces are numbered `−x, +x, −y, +y, −z, +z`,
//! i.e. face `f` is normal to direction `f / 2` on side `f % 2`.

mod benchmark;
mod geometry;
mod hierarchy;
pub mod vtk;

pub use benchmark::{benchmark_inclusions, build_benchmark_mesh, Inclusion, DOMAIN_SIDE};
pub use geometry::{compute_geometry_cache, jacobian_at, GeometryCache};
pub use geometry::map_point;
pub use hierarchy::{MeshHierarchy, ParentLink};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialId {
    Matrix,
    Inclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryId {
    Bottom,
    Top,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundaryFace {
    pub element: usize,
    pub face: usize,
    pub id: BoundaryId,
}

/// A conforming quad (2D) or hex (3D) mesh with a multilinear geometry.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    /// Coordinates in mm; the unused third coordinate is 0 in 2D.
    vertices: Vec<[f64; 3]>,
    /// `2^dim` vertex indices per element, lexicographic.
    cells: Vec<usize>,
    materials: Vec<MaterialId>,
    boundary: Vec<BoundaryFace>,
}

/// The unrefined input mesh.
pub type CoarseMesh = Mesh;

impl Mesh {
    /// Build a mesh and check its topological invariants. Positivity of the
    /// geometric Jacobian is checked by [`compute_geometry_cache`].
    pub fn new(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        cells: Vec<usize>,
        materials: Vec<MaterialId>,
        boundary: Vec<BoundaryFace>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Mesh(format!("dimension must be 2 or 3, got {dim}")));
        }
        let nv = 1 << dim;
        if cells.len() % nv != 0 {
            return Err(Error::Mesh("cell array length is not a multiple of 2^dim".into()));
        }
        let n_cells = cells.len() / nv;
        if materials.len() != n_cells {
            return Err(Error::Mesh(format!(
                "{} material ids for {n_cells} elements",
                materials.len()
            )));
        }
        for (e, corners) in cells.chunks_exact(nv).enumerate() {
            let mut seen = HashSet::with_capacity(nv);
            for &v in corners {
                if v >= vertices.len() {
                    return Err(Error::Mesh(format!("element {e} references vertex {v} out of range")));
                }
                if !seen.insert(v) {
                    return Err(Error::Mesh(format!("element {e} repeats vertex {v}")));
                }
            }
        }
        let mut faces = HashSet::with_capacity(boundary.len());
        for bf in &boundary {
            if bf.element >= n_cells || bf.face >= 2 * dim {
                return Err(Error::Mesh(format!(
                    "boundary face ({}, {}) out of range",
                    bf.element, bf.face
                )));
            }
            if !faces.insert((bf.element, bf.face)) {
                return Err(Error::Mesh(format!(
                    "boundary face ({}, {}) listed twice",
                    bf.element, bf.face
                )));
            }
        }
        Ok(Mesh {
            dim,
            vertices,
            cells,
            materials,
            boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_elements(&self) -> usize {
        self.materials.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn vertices_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.vertices
    }

    pub fn corners(&self, element: usize) -> &[usize] {
        let nv = 1 << self.dim;
        &self.cells[element * nv..(element + 1) * nv]
    }

    pub fn material(&self, element: usize) -> MaterialId {
        self.materials[element]
    }

    pub fn materials(&self) -> &[MaterialId] {
        &self.materials
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary
    }

    pub fn faces_with_id(&self, id: BoundaryId) -> impl Iterator<Item = &BoundaryFace> {
        self.boundary.iter().filter(move |f| f.id == id)
    }

    /// Corner coordinates of an element, padded to 8 entries.
    pub fn corner_coords(&self, element: usize) -> [[f64; 3]; 8] {
        let mut out = [[0.0; 3]; 8];
        for (slot, &v) in out.iter_mut().zip(self.corners(element)) {
            *slot = self.vertices[v];
        }
        out
    }

    pub fn centroid(&self, element: usize) -> [f64; 3] {
        let corners = self.corners(element);
        let mut c = [0.0; 3];
        for &v in corners {
            for d in 0..3 {
                c[d] += self.vertices[v][d];
            }
        }
        c.map(|x| x / corners.len() as f64)
    }
}

/// Orientation-independent identifier of a point that lies on a regular
/// lattice inside an element.
///
/// A point with lattice coordinates `h ∈ {0..=n}^dim` is the multilinear
/// combination of the element corners with weights
/// `Π_d (c_d ? h_d : n − h_d) / n^dim`. Listing the corners with non-zero
/// weight as `(global vertex, numerator)` pairs, sorted by vertex, yields a
/// key that two neighbouring elements compute identically for a shared point
/// regardless of their local orientation.
pub fn lattice_key(corners: &[usize], dim: usize, n: usize, h: &[usize]) -> Vec<(usize, u64)> {
    let mut key = Vec::with_capacity(corners.len());
    for (c, &v) in corners.iter().enumerate() {
        let mut w = 1u64;
        for (d, &hd) in h.iter().enumerate().take(dim) {
            let bit = (c >> d) & 1;
            w *= if bit == 1 { hd as u64 } else { (n - hd) as u64 };
        }
        if w != 0 {
            key.push((v, w));
        }
    }
    key.sort_unstable();
    key
}

/// Multilinear corner shape function values and reference derivatives at `xi`.
pub(crate) fn corner_shape(dim: usize, c: usize, xi: &[f64]) -> (f64, [f64; 3]) {
    let mut value = 1.0;
    let mut grad = [1.0; 3];
    for d in 0..dim {
        let bit = (c >> d) & 1;
        let (v, dv) = if bit == 1 { (xi[d], 1.0) } else { (1.0 - xi[d], -1.0) };
        value *= v;
        for (e, g) in grad.iter_mut().enumerate().take(dim) {
            *g *= if e == d { dv } else { v };
        }
    }
    (value, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_repeated_vertex() {
        let verts = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let err = Mesh::new(2, verts, vec![0, 1, 2, 2], vec![MaterialId::Matrix], vec![]);
        assert!(matches!(err, Err(Error::Mesh(_))));
    }

    #[test]
    fn rejects_duplicate_boundary_face() {
        let verts = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let bf = BoundaryFace { element: 0, face: 2, id: BoundaryId::Bottom };
        let err = Mesh::new(2, verts, vec![0, 1, 2, 3], vec![MaterialId::Matrix], vec![bf, bf]);
        assert!(err.is_err());
    }

    #[test]
    fn lattice_key_is_orientation_independent() {
        // Edge 11-13 is the +x edge of A and the (reversed) -x edge of B.
        let a = [10, 11, 12, 13];
        let b = [13, 20, 11, 21];
        // one third of the way from 11 to 13 with p = 3
        let ka = lattice_key(&a, 2, 3, &[3, 1]);
        let kb = lattice_key(&b, 2, 3, &[0, 2]);
        assert_eq!(ka, vec![(11, 6), (13, 3)]);
        assert_eq!(ka, kb);
    }
}
