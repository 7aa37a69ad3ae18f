use crate::mesh::{lattice_key, map_point, BoundaryId, Mesh};
use std::collections::HashMap;

/// Global numbering of the nodes of a continuous degree-`p` Lagrange space.
///
/// Vector fields are node-blocked: component `c` of node `k` is global DoF
/// `k * components + c`. Nodes are numbered in order of first touch while
/// visiting elements in mesh order and their local nodes lexicographically.
#[derive(Debug, Clone)]
pub struct DofMap {
    dim: usize,
    degree: usize,
    components: usize,
    n_nodes: usize,
    nodes_per_element: usize,
    element_nodes: Vec<usize>,
    node_coords: Vec<[f64; 3]>,
}

impl DofMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.components
    }

    pub fn nodes_per_element(&self) -> usize {
        self.nodes_per_element
    }

    /// Global node indices of an element, lexicographic local order.
    #[inline]
    pub fn element_nodes(&self, element: usize) -> &[usize] {
        let n = self.nodes_per_element;
        &self.element_nodes[element * n..(element + 1) * n]
    }

    pub fn n_elements(&self) -> usize {
        self.element_nodes.len() / self.nodes_per_element
    }

    pub fn node_coords(&self) -> &[[f64; 3]] {
        &self.node_coords
    }

    /// Gather an element's local vector, component-major: `local[c * n + i]`.
    #[inline]
    pub fn gather(&self, element: usize, global: &[f64], local: &mut [f64]) {
        let nodes = self.element_nodes(element);
        let n = nodes.len();
        let nc = self.components;
        for (i, &k) in nodes.iter().enumerate() {
            for c in 0..nc {
                local[c * n + i] = global[k * nc + c];
            }
        }
    }

    /// Interpolate a vector-valued function at the nodes.
    pub fn interpolate(&self, f: impl Fn(&[f64; 3]) -> Vec<f64>) -> Vec<f64> {
        let nc = self.components;
        let mut out = vec![0.0; self.n_dofs()];
        for (k, x) in self.node_coords.iter().enumerate() {
            let v = f(x);
            out[k * nc..(k + 1) * nc].copy_from_slice(&v[..nc]);
        }
        out
    }
}

/// Number the nodes of the degree-`degree` space on `mesh`.
pub fn build_dof_map(mesh: &Mesh, degree: usize, components: usize) -> DofMap {
    assert!(degree >= 1, "polynomial degree must be at least 1");
    let dim = mesh.dim();
    let n1 = degree + 1;
    let npe = n1.pow(dim as u32);
    let mut ids: HashMap<Vec<(usize, u64)>, usize> = HashMap::new();
    let mut element_nodes = Vec::with_capacity(mesh.n_elements() * npe);
    let mut node_coords = Vec::new();
    let mut h = [0usize; 3];
    for e in 0..mesh.n_elements() {
        let corners = mesh.corners(e);
        for i in 0..npe {
            let mut r = i;
            for hd in h.iter_mut().take(dim) {
                *hd = r % n1;
                r /= n1;
            }
            let key = lattice_key(corners, dim, degree, &h[..dim]);
            let next = node_coords.len();
            let id = *ids.entry(key).or_insert(next);
            if id == next {
                let xi = [
                    h[0] as f64 / degree as f64,
                    h[1] as f64 / degree as f64,
                    h[2] as f64 / degree as f64,
                ];
                node_coords.push(map_point(mesh, e, &xi));
            }
            element_nodes.push(id);
        }
    }
    DofMap {
        dim,
        degree,
        components,
        n_nodes: node_coords.len(),
        nodes_per_element: npe,
        element_nodes,
        node_coords,
    }
}

/// Homogeneous Dirichlet constraints: every component of every node on a
/// face tagged [`BoundaryId::Bottom`] is fixed to zero.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    mask: Vec<bool>,
    dofs: Vec<usize>,
}

impl ConstraintSet {
    pub fn bottom_fixed(mesh: &Mesh, dofs: &DofMap) -> Self {
        Self::on_boundary(mesh, dofs, BoundaryId::Bottom)
    }

    pub fn on_boundary(mesh: &Mesh, dofs: &DofMap, id: BoundaryId) -> Self {
        let dim = mesh.dim();
        let n1 = dofs.degree() + 1;
        let p = dofs.degree();
        let nc = dofs.components();
        let mut mask = vec![false; dofs.n_dofs()];
        for bf in mesh.faces_with_id(id) {
            let dir = bf.face / 2;
            let at = if bf.face % 2 == 1 { p } else { 0 };
            for (i, &k) in dofs.element_nodes(bf.element).iter().enumerate() {
                let hd = (i / n1.pow(dir as u32)) % n1;
                if hd == at {
                    for c in 0..nc {
                        mask[k * nc + c] = true;
                    }
                }
            }
        }
        debug_assert!(dim >= 2);
        let list = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
        ConstraintSet { mask, dofs: list }
    }

    /// No constrained DoFs.
    pub fn none(n_dofs: usize) -> Self {
        ConstraintSet {
            mask: vec![false; n_dofs],
            dofs: Vec::new(),
        }
    }

    #[inline]
    pub fn is_constrained(&self, dof: usize) -> bool {
        self.mask[dof]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Sorted constrained DoF indices.
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    /// Prescribed value of a constrained DoF; the constraints are homogeneous.
    pub fn prescribed_value(&self, _dof: usize) -> f64 {
        0.0
    }

    /// Set constrained entries of `v` to their prescribed values.
    pub fn apply_to(&self, v: &mut [f64]) {
        for &d in &self.dofs {
            v[d] = 0.0;
        }
    }
}

/// Add an element's component-major local vector into `global`, dropping
/// contributions to constrained rows.
pub fn distribute_local_to_global(
    local: &[f64],
    element: usize,
    dofs: &DofMap,
    constraints: &ConstraintSet,
    global: &mut [f64],
) {
    let nodes = dofs.element_nodes(element);
    let n = nodes.len();
    let nc = dofs.components();
    for (i, &k) in nodes.iter().enumerate() {
        for c in 0..nc {
            let g = k * nc + c;
            if !constraints.is_constrained(g) {
                global[g] += local[c * n + i];
            }
        }
    }
}
