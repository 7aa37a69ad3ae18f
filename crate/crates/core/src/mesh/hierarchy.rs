use super::{corner_shape, lattice_key, BoundaryFace, Mesh};
use std::collections::HashMap;

/// Position of a refined element inside its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParentLink {
    pub parent: usize,
    /// Lexicographic child index: bit `d` set means the upper half in direction `d`.
    pub child: usize,
}

/// Nested meshes obtained by repeated 2:1 global refinement. Level 0 is the
/// coarse mesh.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    levels: Vec<Mesh>,
    /// `parents[l]` maps level-`l` elements to level `l − 1`; empty for level 0.
    parents: Vec<Vec<ParentLink>>,
}

impl MeshHierarchy {
    pub fn new(coarse: Mesh) -> Self {
        MeshHierarchy {
            levels: vec![coarse],
            parents: vec![Vec::new()],
        }
    }

    /// Append `times` globally refined levels.
    pub fn refine_globally(&mut self, times: usize) {
        for _ in 0..times {
            let (fine, links) = refine(self.finest());
            self.levels.push(fine);
            self.parents.push(links);
        }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> &Mesh {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[Mesh] {
        &self.levels
    }

    pub fn finest(&self) -> &Mesh {
        self.levels.last().expect("hierarchy has at least one level")
    }

    pub fn parent_links(&self, level: usize) -> &[ParentLink] {
        &self.parents[level]
    }

    /// Level-0 ancestor of an element on `level`.
    pub fn coarse_ancestor(&self, level: usize, mut element: usize) -> usize {
        for l in (1..=level).rev() {
            element = self.parents[l][element].parent;
        }
        element
    }
}

/// Split every element into `2^dim` children.
///
/// New vertices sit at edge, face and cell midpoints; they are shared
/// between neighbours through [`lattice_key`] with a lattice spacing of ½.
fn refine(mesh: &Mesh) -> (Mesh, Vec<ParentLink>) {
    let dim = mesh.dim();
    let nv = 1 << dim;
    let n_el = mesh.n_elements();

    let mut vertices: Vec<[f64; 3]> = mesh.vertices().to_vec();
    let mut ids: HashMap<Vec<(usize, u64)>, usize> = HashMap::new();
    let mut cells = Vec::with_capacity(n_el * nv * nv);
    let mut links = Vec::with_capacity(n_el * nv);
    let mut materials = Vec::with_capacity(n_el * nv);

    // local {0,1,2}^dim half-lattice point -> global vertex, per parent
    let n_half = 3usize.pow(dim as u32);
    let mut local = vec![0usize; n_half];
    for e in 0..n_el {
        let corners = mesh.corners(e);
        let coords = mesh.corner_coords(e);
        for (idx, slot) in local.iter_mut().enumerate() {
            let mut h = [0usize; 3];
            let mut rem = idx;
            for hd in h.iter_mut().take(dim) {
                *hd = rem % 3;
                rem /= 3;
            }
            let is_corner = h.iter().take(dim).all(|&x| x != 1);
            if is_corner {
                let c: usize = (0..dim).map(|d| (h[d] / 2) << d).sum();
                *slot = corners[c];
                continue;
            }
            let key = lattice_key(corners, dim, 2, &h[..dim]);
            *slot = *ids.entry(key).or_insert_with(|| {
                let xi = [h[0] as f64 * 0.5, h[1] as f64 * 0.5, h[2] as f64 * 0.5];
                let mut x = [0.0; 3];
                for (c, cc) in coords.iter().enumerate().take(nv) {
                    let (w, _) = corner_shape(dim, c, &xi);
                    for d in 0..3 {
                        x[d] += w * cc[d];
                    }
                }
                vertices.push(x);
                vertices.len() - 1
            });
        }
        for child in 0..nv {
            for c in 0..nv {
                let mut idx = 0;
                let mut stride = 1;
                for d in 0..dim {
                    idx += (((child >> d) & 1) + ((c >> d) & 1)) * stride;
                    stride *= 3;
                }
                cells.push(local[idx]);
            }
            links.push(ParentLink { parent: e, child });
            materials.push(mesh.material(e));
        }
    }

    let mut boundary = Vec::with_capacity(mesh.boundary_faces().len() * (nv / 2));
    for bf in mesh.boundary_faces() {
        let dir = bf.face / 2;
        let side = bf.face % 2;
        for child in 0..nv {
            if (child >> dir) & 1 == side {
                boundary.push(BoundaryFace {
                    element: bf.element * nv + child,
                    face: bf.face,
                    id: bf.id,
                });
            }
        }
    }

    let fine = Mesh::new(dim, vertices, cells, materials, boundary)
        .expect("refinement of a valid mesh is valid");
    (fine, links)
}
