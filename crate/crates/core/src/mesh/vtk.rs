//! Legacy ASCII VTK export for debugging.

use super::{MaterialId, Mesh};
use std::io::{self, Write};

// Lexicographic -> VTK corner order.
const QUAD_ORDER: [usize; 4] = [0, 1, 3, 2];
const HEX_ORDER: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];

/// Write `mesh` as an unstructured grid with `material_id` cell data
/// (0 = matrix, 1 = inclusion). An optional nodal displacement (vertex-major,
/// `dim` components per vertex) is written as point data.
pub fn write_vtk<W: Write>(mesh: &Mesh, displacement: Option<&[f64]>, out: &mut W) -> io::Result<()> {
    let dim = mesh.dim();
    let nv = 1 << dim;
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "hyperfree mesh")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for v in mesh.vertices() {
        writeln!(out, "{:e} {:e} {:e}", v[0], v[1], v[2])?;
    }
    let n_el = mesh.n_elements();
    writeln!(out, "CELLS {} {}", n_el, n_el * (nv + 1))?;
    let order: &[usize] = if dim == 2 { &QUAD_ORDER } else { &HEX_ORDER };
    for e in 0..n_el {
        let corners = mesh.corners(e);
        write!(out, "{nv}")?;
        for &c in order {
            write!(out, " {}", corners[c])?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {n_el}")?;
    let cell_type = if dim == 2 { 9 } else { 12 };
    for _ in 0..n_el {
        writeln!(out, "{cell_type}")?;
    }
    writeln!(out, "CELL_DATA {n_el}")?;
    writeln!(out, "SCALARS material_id int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for &m in mesh.materials() {
        writeln!(out, "{}", u8::from(m == MaterialId::Inclusion))?;
    }
    if let Some(u) = displacement {
        writeln!(out, "POINT_DATA {}", mesh.n_vertices())?;
        writeln!(out, "VECTORS displacement double")?;
        for v in 0..mesh.n_vertices() {
            let c = |d: usize| if d < dim { u[v * dim + d] } else { 0.0 };
            writeln!(out, "{:e} {:e} {:e}", c(0), c(1), c(2))?;
        }
    }
    Ok(())
}
