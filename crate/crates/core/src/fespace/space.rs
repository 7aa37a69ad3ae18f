use super::{build_dof_map, gauss_legendre, Basis1D, ConstraintSet, DofMap};
use crate::error::Result;
use crate::mesh::{compute_geometry_cache, GeometryCache, Mesh};
use std::sync::Arc;

/// Vector-valued degree-`p` Lagrange space on one mesh level, with the
/// bottom face clamped.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    basis: Basis1D,
    dofs: DofMap,
    constraints: ConstraintSet,
    geometry: GeometryCache,
}

impl FeSpace {
    /// `n_q` Gauss points per direction; `None` means `degree + 1`.
    pub fn new(mesh: Arc<Mesh>, degree: usize, n_q: Option<usize>) -> Result<Self> {
        let quad = gauss_legendre(n_q.unwrap_or(degree + 1))?;
        let geometry = compute_geometry_cache(&mesh, &quad)?;
        let basis = Basis1D::new(degree, quad);
        let dofs = build_dof_map(&mesh, degree, mesh.dim());
        let constraints = ConstraintSet::bottom_fixed(&mesh, &dofs);
        Ok(FeSpace {
            mesh,
            basis,
            dofs,
            constraints,
            geometry,
        })
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn basis(&self) -> &Basis1D {
        &self.basis
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn geometry(&self) -> &GeometryCache {
        &self.geometry
    }
}
