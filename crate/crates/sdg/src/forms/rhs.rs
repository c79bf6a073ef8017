//! Right-hand-side assembly: volume loads, interface defect loads, strong
//! Dirichlet data (edge-moment interpolation into constrained dofs plus the
//! boundary consistency loads), and the lift of constrained columns.

use super::{BlockSystem, CoupledSpaces};
use crate::cases::ManufacturedCase;
use crate::error::Result;
use crate::femspace::modal::edge_legendre;
use crate::mesh::{BoundaryTag, InterfaceGlue};
use crate::quadrature::{map_to_segment, map_to_triangle, segment_rule, triangle_rule};

/// Assembled right-hand side plus the prescribed values of the constrained
/// dofs (component-major for the two velocity components).
#[derive(Debug, Clone)]
pub struct RhsBundle {
    pub rhs: Vec<f64>,
    pub xc_us: Vec<f64>,
    pub xc_pd: Vec<f64>,
}

pub fn assemble_rhs(
    case: &ManufacturedCase,
    spaces: &CoupledSpaces,
    glue: &InterfaceGlue,
    system: &BlockSystem,
) -> Result<RhsBundle> {
    let k = spaces.k;
    let l = spaces.layout;
    let mut rhs = vec![0.0; l.total()];
    let tri = triangle_rule(2 * k + 4)?;
    let tri_hi = triangle_rule(3 * k + 4)?;
    let seg = segment_rule(2 * k + 3)?;
    let seg_data = segment_rule(2 * k + 4)?;

    let mesh_s = &spaces.u_s.mesh;
    let mesh_d = &spaces.u_d.mesh;
    let nf_us = l.nf_us;

    // (f_S, v_S) over the Stokes triangles
    for t in 0..mesh_s.triangles.len() {
        let [a, b, c] = mesh_s.tri_points(t);
        let (pts, wts) = map_to_triangle(&tri, a, b, c);
        let (uval, _) = spaces.u_s.eval_u(t, &pts);
        let udofs = spaces.u_s.entity_dofs(t);
        for (i, &ui) in udofs.iter().enumerate() {
            let Some(fi) = spaces.u_s.dofs.free_index[ui] else { continue };
            let mut acc = [0.0f64; 2];
            for (q, &w) in wts.iter().enumerate() {
                let f = (case.f_s)(pts[q]);
                acc[0] += w * f.x * uval[i][q];
                acc[1] += w * f.y * uval[i][q];
            }
            for comp in 0..2 {
                rhs[l.o_us() + comp * nf_us + fi] += acc[comp];
            }
        }
    }

    // (f_D, q_D) and (g_D, v_D) over the Darcy triangles
    for t in 0..mesh_d.triangles.len() {
        let [a, b, c] = mesh_d.tri_points(t);
        let (pts, wts) = map_to_triangle(&tri, a, b, c);
        let (qval, _) = spaces.u_d.eval_u(t, &pts);
        let qdofs = spaces.u_d.entity_dofs(t);
        for (i, &qi) in qdofs.iter().enumerate() {
            let Some(fi) = spaces.u_d.dofs.free_index[qi] else { continue };
            let mut acc = 0.0;
            for (q, &w) in wts.iter().enumerate() {
                acc += w * (case.f_d)(pts[q]) * qval[i][q];
            }
            rhs[l.o_pd() + fi] += acc;
        }
        // g_D carries the non-polynomial Forchheimer weight of manufactured
        // cases: integrate with the high-order rule
        let (pts, wts) = map_to_triangle(&tri_hi, a, b, c);
        let (vval, _) = spaces.v_d.eval_v(t, &pts);
        let vdofs = spaces.v_d.entity_dofs(t);
        for (i, &vi) in vdofs.iter().enumerate() {
            let fi = spaces.v_d.dofs.free_index[vi].unwrap();
            let mut acc = 0.0;
            for (q, &w) in wts.iter().enumerate() {
                acc += w * (case.g_d)(pts[q]).dot(vval[i][q]);
            }
            rhs[l.o_ud() + fi] += acc;
        }
    }

    // interface defect loads on Stokes test functions:
    // -<g1, v_S . n_S> - <g2, v_S . t>
    let n_s = glue.normal_s;
    let t_vec = glue.tangent;
    for &e in &mesh_s.fu_edges {
        let edge = &mesh_s.edges[e];
        if edge.boundary_tag != Some(BoundaryTag::Interface) {
            continue;
        }
        let (lo, hi) = edge.endpoints(mesh_s);
        let (epts, ewts) = map_to_segment(&seg, lo, hi);
        let base = spaces.u_s.dofs.edge_dof_base(e).unwrap();
        for (q, &w) in ewts.iter().enumerate() {
            let leg = edge_legendre(k, edge.length, seg.points[q].x);
            let g1 = (case.g1)(epts[q]);
            let g2 = (case.g2)(epts[q]);
            for m in 0..=k {
                let Some(fi) = spaces.u_s.dofs.free_index[base + m] else { continue };
                for (comp, nc, tc) in [(0usize, n_s.x, t_vec.x), (1usize, n_s.y, t_vec.y)] {
                    rhs[l.o_us() + comp * nf_us + fi] -= w * leg[m] * (g1 * nc + g2 * tc);
                }
            }
        }
    }

    // strong Dirichlet data: constrained edge moments
    let xc_us = interpolate_us_trace(case, spaces, &seg_data);
    let xc_pd = interpolate_pd_trace(case, spaces, &seg_data);

    // boundary consistency loads on the Stokes outer boundary:
    //   tau rows: -<g, tau n>, p_S rows: +<g . n, q>
    for &e in &mesh_s.fu_edges {
        let edge = &mesh_s.edges[e];
        if edge.boundary_tag != Some(BoundaryTag::GammaS) {
            continue;
        }
        let (lo, hi) = edge.endpoints(mesh_s);
        let (epts, ewts) = map_to_segment(&seg_data, lo, hi);
        let side = edge.tri_plus;
        let (vval, _) = spaces.v_s.eval_v(side, &epts);
        let vdofs = spaces.v_s.entity_dofs(side);
        let cell = mesh_s.triangles[side].cell;
        let (pval, _) = spaces.p_s.eval_p(cell, &epts);
        let pdofs = spaces.p_s.entity_dofs(cell);
        for (q, &w) in ewts.iter().enumerate() {
            let g = (case.u_s_dirichlet)(epts[q]);
            let gn = g.dot(edge.normal);
            for (j, &vj) in vdofs.iter().enumerate() {
                let fj = spaces.v_s.dofs.free_index[vj].unwrap();
                let shape_n = vval[j][q].dot(edge.normal);
                rhs[l.o_sigma() + fj] -= w * g.x * shape_n;
                rhs[l.o_sigma() + l.nf_vs + fj] -= w * g.y * shape_n;
            }
            for (x, &pj) in pdofs.iter().enumerate() {
                rhs[l.o_ps() + pj] += w * gn * pval[x][q];
            }
        }
    }

    // Darcy pressure Dirichlet data: -<g_pD, v . n> on the Dirichlet part
    for &e in &mesh_d.fu_edges {
        let edge = &mesh_d.edges[e];
        if edge.boundary_tag != Some(BoundaryTag::GammaD) {
            continue;
        }
        if spaces.noflux_edges.contains(&e) {
            continue;
        }
        let (lo, hi) = edge.endpoints(mesh_d);
        let (epts, ewts) = map_to_segment(&seg_data, lo, hi);
        let side = edge.tri_plus;
        let (vval, _) = spaces.v_d.eval_v(side, &epts);
        let vdofs = spaces.v_d.entity_dofs(side);
        for (q, &w) in ewts.iter().enumerate() {
            let g = (case.p_d_dirichlet)(epts[q]);
            for (j, &vj) in vdofs.iter().enumerate() {
                let fj = spaces.v_d.dofs.free_index[vj].unwrap();
                rhs[l.o_ud() + fj] -= w * g * vval[j][q].dot(edge.normal);
            }
        }
    }

    // move the lifted columns: rhs -= sign(block) * lift * x_c
    system.lift_c_bjs.accumulate_matvec(&xc_us, -1.0, &mut rhs[l.o_us()..l.o_us() + l.n_us]);
    system
        .lift_c_pd_vs
        .accumulate_matvec(&xc_pd, -1.0, &mut rhs[l.o_us()..l.o_us() + l.n_us]);
    system
        .lift_c_us_qd
        .accumulate_matvec(&xc_us, -1.0, &mut rhs[l.o_pd()..l.o_pd() + l.n_pd]);
    system.lift_a_s_star.accumulate_matvec(
        &xc_us,
        1.0,
        &mut rhs[l.o_sigma()..l.o_sigma() + l.n_sigma],
    );
    system
        .lift_a_d_star
        .accumulate_matvec(&xc_pd, 1.0, &mut rhs[l.o_ud()..l.o_ud() + l.n_ud]);
    system
        .lift_b_s
        .accumulate_matvec(&xc_us, -1.0, &mut rhs[l.o_ps()..l.o_ps() + l.n_ps]);

    Ok(RhsBundle { rhs, xc_us, xc_pd })
}

/// Edge moments of the Stokes Dirichlet trace on the constrained edges,
/// component-major.
fn interpolate_us_trace(
    case: &ManufacturedCase,
    spaces: &CoupledSpaces,
    seg: &crate::quadrature::QuadRule,
) -> Vec<f64> {
    let mesh = &spaces.u_s.mesh;
    let k = spaces.k;
    let n_c = spaces.u_s.dofs.n_constrained();
    let mut xc = vec![0.0; 2 * n_c];
    let clist = spaces.u_s.dofs.constrained_list();
    let cpos: std::collections::HashMap<usize, usize> =
        clist.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    for &e in &mesh.fu_edges {
        let edge = &mesh.edges[e];
        let base = spaces.u_s.dofs.edge_dof_base(e).unwrap();
        if !spaces.u_s.dofs.constrained[base] {
            continue;
        }
        let (lo, hi) = edge.endpoints(mesh);
        let (epts, ewts) = map_to_segment(seg, lo, hi);
        for (q, &w) in ewts.iter().enumerate() {
            let leg = edge_legendre(k, edge.length, seg.points[q].x);
            let g = (case.u_s_dirichlet)(epts[q]);
            for m in 0..=k {
                let pos = cpos[&(base + m)];
                xc[pos] += w * leg[m] * g.x;
                xc[n_c + pos] += w * leg[m] * g.y;
            }
        }
    }
    xc
}

fn interpolate_pd_trace(
    case: &ManufacturedCase,
    spaces: &CoupledSpaces,
    seg: &crate::quadrature::QuadRule,
) -> Vec<f64> {
    let mesh = &spaces.u_d.mesh;
    let k = spaces.k;
    let n_c = spaces.u_d.dofs.n_constrained();
    let mut xc = vec![0.0; n_c];
    let clist = spaces.u_d.dofs.constrained_list();
    let cpos: std::collections::HashMap<usize, usize> =
        clist.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    for &e in &mesh.fu_edges {
        let edge = &mesh.edges[e];
        let base = spaces.u_d.dofs.edge_dof_base(e).unwrap();
        if !spaces.u_d.dofs.constrained[base] {
            continue;
        }
        let (lo, hi) = edge.endpoints(mesh);
        let (epts, ewts) = map_to_segment(seg, lo, hi);
        for (q, &w) in ewts.iter().enumerate() {
            let leg = edge_legendre(k, edge.length, seg.points[q].x);
            let g = (case.p_d_dirichlet)(epts[q]);
            for m in 0..=k {
                xc[cpos[&(base + m)]] += w * leg[m] * g;
            }
        }
    }
    xc
}
