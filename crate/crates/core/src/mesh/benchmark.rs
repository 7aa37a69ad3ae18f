use super::{BoundaryFace, BoundaryId, MaterialId, Mesh};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Side length of the benchmark square/cube in mm.
pub const DOMAIN_SIDE: f64 = 1e-3;

/// A circular (2D), spherical (3D, three center coordinates) or cylindrical
/// (3D, two center coordinates, extruded along z) stiff inclusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Inclusion {
    fn contains(&self, p: &[f64; 3]) -> bool {
        let r2: f64 = self
            .center
            .iter()
            .zip(p)
            .map(|(c, x)| (x - c) * (x - c))
            .sum();
        r2 < self.radius * self.radius
    }
}

/// Two stiff inclusions used by the benchmark presets: disks (2D) or balls
/// (3D) of radius `0.18 L` centred at `(0.3, 0.3[, 0.5]) L` and
/// `(0.7, 0.7[, 0.5]) L`.
pub fn benchmark_inclusions(dim: usize) -> Vec<Inclusion> {
    let l = DOMAIN_SIDE;
    [[0.3, 0.3], [0.7, 0.7]]
        .iter()
        .map(|c| {
            let mut center = vec![c[0] * l, c[1] * l];
            if dim == 3 {
                center.push(0.5 * l);
            }
            Inclusion { center, radius: 0.18 * l }
        })
        .collect()
}

/// Structured `n^dim` grid over `[0, DOMAIN_SIDE]^dim`.
///
/// An element belongs to an inclusion iff its centroid lies inside one.
/// Faces on `y = 0` are tagged bottom and faces on `y = DOMAIN_SIDE` top, in
/// both 2D and 3D (the 3D body is the 2D section extruded along z). All
/// other exterior faces are tagged other.
pub fn build_benchmark_mesh(dim: usize, n: usize, inclusions: &[Inclusion]) -> Result<Mesh> {
    if dim != 2 && dim != 3 {
        return Err(Error::Mesh(format!("dimension must be 2 or 3, got {dim}")));
    }
    if n < 2 {
        return Err(Error::Mesh(format!("need at least 2 cells per side, got {n}")));
    }
    for inc in inclusions {
        let k = inc.center.len();
        if !(k == dim || (dim == 3 && k == 2)) {
            return Err(Error::Mesh(format!(
                "inclusion center has {k} coordinates in a {dim}D domain"
            )));
        }
        if inc.center.iter().any(|&c| !(0.0..=DOMAIN_SIDE).contains(&c)) {
            return Err(Error::Mesh(format!(
                "inclusion center {:?} lies outside the domain",
                inc.center
            )));
        }
        if !(inc.radius > 0.0) {
            return Err(Error::Mesh(format!("inclusion radius {} must be positive", inc.radius)));
        }
    }

    let np = n + 1;
    let h = DOMAIN_SIDE / n as f64;
    let nz = if dim == 3 { np } else { 1 };
    let mut vertices = Vec::with_capacity(np * np * nz);
    for k in 0..nz {
        for j in 0..np {
            for i in 0..np {
                // the last layer is pinned to the exact side length
                let coord = |m: usize| if m == n { DOMAIN_SIDE } else { m as f64 * h };
                vertices.push([coord(i), coord(j), if dim == 3 { coord(k) } else { 0.0 }]);
            }
        }
    }
    let vid = |i: usize, j: usize, k: usize| i + np * (j + np * k);

    let ez = if dim == 3 { n } else { 1 };
    let mut cells = Vec::with_capacity(n * n * ez * (1 << dim));
    let mut boundary = Vec::new();
    let mut e = 0;
    for k in 0..ez {
        for j in 0..n {
            for i in 0..n {
                for c in 0..(1 << dim) {
                    let (di, dj, dk) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
                    cells.push(vid(i + di, j + dj, k + dk));
                }
                let mut tag = |face: usize, id: BoundaryId| {
                    boundary.push(BoundaryFace { element: e, face, id })
                };
                if i == 0 {
                    tag(0, BoundaryId::Other);
                }
                if i == n - 1 {
                    tag(1, BoundaryId::Other);
                }
                if j == 0 {
                    tag(2, BoundaryId::Bottom);
                }
                if j == n - 1 {
                    tag(3, BoundaryId::Top);
                }
                if dim == 3 {
                    if k == 0 {
                        tag(4, BoundaryId::Other);
                    }
                    if k == n - 1 {
                        tag(5, BoundaryId::Other);
                    }
                }
                e += 1;
            }
        }
    }

    let n_el = e;
    let mut mesh = Mesh::new(dim, vertices, cells, vec![MaterialId::Matrix; n_el], boundary)?;
    for el in 0..n_el {
        let c = mesh.centroid(el);
        if inclusions.iter().any(|inc| inc.contains(&c)) {
            mesh.materials[el] = MaterialId::Inclusion;
        }
    }
    Ok(mesh)
}
