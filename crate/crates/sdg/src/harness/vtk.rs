//! Legacy-text VTK output of the coupled solution: both staggered
//! triangulations in one unstructured grid, with per-cell averaged field
//! values.

use crate::error::Result;
use crate::mesh::StaggeredMesh;
use crate::quadrature::{map_to_triangle, triangle_rule};
use crate::solver::CoupledSolution;
use std::fmt::Write as _;
use std::path::Path;

/// Writes the solution as a legacy VTK unstructured grid. Cells are the
/// staggered triangles of both subdomains; Stokes-only fields carry zeros on
/// Darcy cells and vice versa.
pub fn emit_vtk(solution: &CoupledSolution, path: &Path) -> Result<()> {
    let mesh_s = solution.u_s.space.mesh.clone();
    let mesh_d = solution.u_d.space.mesh.clone();
    let n_tri = mesh_s.triangles.len() + mesh_d.triangles.len();

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("coupled flow solution\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh_s.points.len() + mesh_d.points.len());
    for p in mesh_s.points.iter().chain(&mesh_d.points) {
        let _ = writeln!(out, "{} {} 0", p.x, p.y);
    }
    let offset = mesh_s.points.len();
    let _ = writeln!(out, "CELLS {} {}", n_tri, 4 * n_tri);
    for tri in &mesh_s.triangles {
        let _ = writeln!(out, "3 {} {} {}", tri.v[0], tri.v[1], tri.v[2]);
    }
    for tri in &mesh_d.triangles {
        let _ = writeln!(
            out,
            "3 {} {} {}",
            tri.v[0] + offset,
            tri.v[1] + offset,
            tri.v[2] + offset
        );
    }
    let _ = writeln!(out, "CELL_TYPES {n_tri}");
    for _ in 0..n_tri {
        out.push_str("5\n");
    }

    // per-cell averages
    let rule = triangle_rule(2)?;
    let avg =
        |mesh: &StaggeredMesh, f: &mut dyn FnMut(usize, &[crate::geometry::Vec2]) -> Vec<f64>| {
            let mut vals = Vec::with_capacity(mesh.triangles.len());
            for t in 0..mesh.triangles.len() {
                let [a, b, c] = mesh.tri_points(t);
                let (pts, wts) = map_to_triangle(&rule, a, b, c);
                let fv = f(t, &pts);
                let area: f64 = wts.iter().sum();
                let mean: f64 =
                    fv.iter().zip(&wts).map(|(v, w)| v * w).sum::<f64>() / area;
                vals.push(mean);
            }
            vals
        };

    let us0 = avg(&mesh_s, &mut |t, pts| solution.u_s.eval_scalar_comp(t, pts, 0));
    let us1 = avg(&mesh_s, &mut |t, pts| solution.u_s.eval_scalar_comp(t, pts, 1));
    let ps = avg(&mesh_s, &mut |t, pts| {
        let cell = mesh_s.triangles[t].cell;
        solution.p_s.eval_scalar_comp(cell, pts, 0)
    });
    let ud0 = avg(&mesh_d, &mut |t, pts| {
        solution.u_d.eval_vector(t, pts).iter().map(|v| v.x).collect()
    });
    let ud1 = avg(&mesh_d, &mut |t, pts| {
        solution.u_d.eval_vector(t, pts).iter().map(|v| v.y).collect()
    });
    let pd = avg(&mesh_d, &mut |t, pts| solution.p_d.eval_scalar_comp(t, pts, 0));

    let zeros_s = vec![0.0; mesh_s.triangles.len()];
    let zeros_d = vec![0.0; mesh_d.triangles.len()];
    let _ = writeln!(out, "CELL_DATA {n_tri}");
    for (name, stokes, darcy) in [
        ("u_S_x", &us0, &zeros_d),
        ("u_S_y", &us1, &zeros_d),
        ("p_S", &ps, &zeros_d),
        ("u_D_x", &zeros_s, &ud0),
        ("u_D_y", &zeros_s, &ud1),
        ("p_D", &zeros_s, &pd),
    ] {
        let _ = writeln!(out, "SCALARS {name} double 1");
        out.push_str("LOOKUP_TABLE default\n");
        for v in stokes.iter().chain(darcy.iter()) {
            let _ = writeln!(out, "{v}");
        }
    }

    std::fs::write(path, out)?;
    Ok(())
}
