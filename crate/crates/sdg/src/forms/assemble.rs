//! Element-by-element assembly of the bilinear-form blocks.
//!
//! Traces on dof-carrying edges use the Legendre expansion of the shared edge
//! moments (the trace of a U field on its primal edge, and of the normal
//! component of a V field on a dual edge, is determined by the edge dofs
//! alone), which keeps shared-dof coupling exact. Jumps follow the fixed edge
//! normal: `[v] = v_plus - v_minus` with the plus triangle the one whose
//! outward normal coincides with the edge normal.

use super::{BlockSystem, CoupledSpaces, PhysicalParams};
use crate::error::Result;
use crate::femspace::modal::edge_legendre;
use crate::femspace::FeSpace;
use crate::geometry::Vec2;
use crate::mesh::{BoundaryTag, InterfaceGlue};
use crate::quadrature::{map_to_segment, map_to_triangle, segment_rule, triangle_rule, QuadRule};
use crate::sparse::Coo;

/// Assembles every Picard-independent block of the coupled system.
pub fn assemble_linear_blocks(
    spaces: &CoupledSpaces,
    params: &PhysicalParams,
    glue: &InterfaceGlue,
) -> Result<BlockSystem> {
    let sample: Vec<Vec2> = spaces
        .v_d
        .mesh
        .triangles
        .iter()
        .enumerate()
        .filter(|(t, _)| t % 7 == 0)
        .map(|(t, _)| spaces.v_d.mesh.tri_centroid(t))
        .collect();
    params.validate(&sample)?;

    let k = spaces.k;
    let l = spaces.layout;
    let tri_rule = triangle_rule(2 * k + 4)?;
    let seg_rule = segment_rule(2 * k + 3)?;

    let n_c_us = spaces.u_s.dofs.n_constrained();
    let n_c_pd = spaces.u_d.dofs.n_constrained();

    let mut sys = BlockSystem {
        layout: l,
        sigma_mass: Coo::new(l.n_sigma, l.n_sigma),
        a_s: Coo::new(l.n_us, l.n_sigma),
        a_s_star: Coo::new(l.n_sigma, l.n_us),
        b_s: Coo::new(l.n_ps, l.n_us),
        b_s_star: Coo::new(l.n_us, l.n_ps),
        a_d: Coo::new(l.n_pd, l.n_ud),
        a_d_star: Coo::new(l.n_ud, l.n_pd),
        c_pd_vs: Coo::new(l.n_us, l.n_pd),
        c_us_qd: Coo::new(l.n_pd, l.n_us),
        c_bjs: Coo::new(l.n_us, l.n_us),
        lift_a_s_star: Coo::new(l.n_sigma, 2 * n_c_us),
        lift_b_s: Coo::new(l.n_ps, 2 * n_c_us),
        lift_c_bjs: Coo::new(l.n_us, 2 * n_c_us),
        lift_c_us_qd: Coo::new(l.n_pd, 2 * n_c_us),
        lift_c_pd_vs: Coo::new(l.n_us, n_c_pd),
        lift_a_d_star: Coo::new(l.n_ud, n_c_pd),
    };

    assemble_stokes(spaces, params, &mut sys, &tri_rule, &seg_rule);
    assemble_darcy(spaces, &mut sys, &tri_rule, &seg_rule);
    assemble_interface(spaces, params, glue, &mut sys, &seg_rule);
    Ok(sys)
}

/// Index helpers for one U-type space: free and constrained column positions.
struct UIndex {
    free: Vec<Option<usize>>,
    constrained_pos: Vec<Option<usize>>,
    n_free: usize,
    n_constrained: usize,
}

impl UIndex {
    fn build(space: &FeSpace) -> UIndex {
        let mut constrained_pos = vec![None; space.n_dofs()];
        let mut n_constrained = 0;
        for d in 0..space.n_dofs() {
            if space.dofs.constrained[d] {
                constrained_pos[d] = Some(n_constrained);
                n_constrained += 1;
            }
        }
        UIndex {
            free: space.dofs.free_index.clone(),
            constrained_pos,
            n_free: space.n_free(),
            n_constrained,
        }
    }

    /// Scatters one (test=free-only, trial=free-or-lift) value with component
    /// shifts applied by the caller through `row` and the closures.
    fn scatter(
        &self,
        block: &mut Coo,
        lift: &mut Coo,
        row: usize,
        trial_dof: usize,
        trial_comp: usize,
        value: f64,
    ) {
        if let Some(fc) = self.free[trial_dof] {
            block.push(row, trial_comp * self.n_free + fc, value);
        } else if let Some(cc) = self.constrained_pos[trial_dof] {
            lift.push(row, trial_comp * self.n_constrained + cc, value);
        }
    }
}

fn assemble_stokes(
    spaces: &CoupledSpaces,
    params: &PhysicalParams,
    sys: &mut BlockSystem,
    tri_rule: &QuadRule,
    seg_rule: &QuadRule,
) {
    let mesh = &spaces.u_s.mesh;
    let k = spaces.k;
    let v_s = &spaces.v_s;
    let u_s = &spaces.u_s;
    let p_s = &spaces.p_s;
    let nf_vs = spaces.layout.nf_vs;
    let nf_us = spaces.layout.nf_us;
    let uidx = UIndex::build(u_s);
    let inv_nu = 1.0 / params.nu;

    // volume terms
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = mesh.tri_points(t);
        let (pts, wts) = map_to_triangle(tri_rule, a, b, c);
        let (uval, ugrad) = u_s.eval_u(t, &pts);
        let (vval, vdiv) = v_s.eval_v(t, &pts);
        let (pval, pgrad) = p_s.eval_p(tri.cell, &pts);
        let udofs = u_s.entity_dofs(t);
        let vdofs = v_s.entity_dofs(t);
        let pdofs = p_s.entity_dofs(tri.cell);

        // sigma mass: nu^-1 (sigma_c, tau_c)
        for (i, &vi) in vdofs.iter().enumerate() {
            let fi = v_s.dofs.free_index[vi].unwrap();
            for (j, &vj) in vdofs.iter().enumerate() {
                let fj = v_s.dofs.free_index[vj].unwrap();
                let mut m = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    m += w * vval[i][q].dot(vval[j][q]);
                }
                for comp in 0..2 {
                    sys.sigma_mass
                        .push(comp * nf_vs + fi, comp * nf_vs + fj, inv_nu * m);
                }
            }
        }

        // a_S volume: -(tau_c, grad v_c); a_S* volume: +(div tau_c, v_c)
        for (i, &ui) in udofs.iter().enumerate() {
            for (j, &vj) in vdofs.iter().enumerate() {
                let fj = v_s.dofs.free_index[vj].unwrap();
                let mut grad_term = 0.0;
                let mut div_term = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    grad_term -= w * vval[j][q].dot(ugrad[i][q]);
                    div_term += w * vdiv[j][q] * uval[i][q];
                }
                for comp in 0..2 {
                    if let Some(fi) = uidx.free[ui] {
                        sys.a_s
                            .push(comp * nf_us + fi, comp * nf_vs + fj, grad_term);
                    }
                    uidx.scatter(
                        &mut sys.a_s_star,
                        &mut sys.lift_a_s_star,
                        comp * nf_vs + fj,
                        ui,
                        comp,
                        div_term,
                    );
                }
            }
        }

        // b_S volume: +(v, grad q); b_S* volume: -(q, div v) with
        // div v = d_x v_1 + d_y v_2 across components
        for (i, &pi) in pdofs.iter().enumerate() {
            for (j, &uj) in udofs.iter().enumerate() {
                let mut gx = 0.0;
                let mut gy = 0.0;
                let mut dx = 0.0;
                let mut dy = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    gx += w * uval[j][q] * pgrad[i][q].x;
                    gy += w * uval[j][q] * pgrad[i][q].y;
                    dx -= w * pval[i][q] * ugrad[j][q].x;
                    dy -= w * pval[i][q] * ugrad[j][q].y;
                }
                uidx.scatter(&mut sys.b_s, &mut sys.lift_b_s, pi, uj, 0, gx);
                uidx.scatter(&mut sys.b_s, &mut sys.lift_b_s, pi, uj, 1, gy);
                for (comp, dval) in [(0usize, dx), (1usize, dy)] {
                    if let Some(fj) = uidx.free[uj] {
                        sys.b_s_star.push(comp * nf_us + fj, pi, dval);
                    }
                }
            }
        }
    }

    // dual (Fp) edges: a_S jump term and b_S* jump term
    for &e in &mesh.fp_edges {
        let edge = &mesh.edges[e];
        let (lo, hi) = edge.endpoints(mesh);
        let (epts, ewts) = map_to_segment(seg_rule, lo, hi);
        let leg: Vec<Vec<f64>> = seg_rule
            .points
            .iter()
            .map(|s| edge_legendre(k, edge.length, s.x))
            .collect();
        let v_edge_base = v_s.dofs.edge_dof_base(e).unwrap();
        let (tp, tm) = mesh.d_of_edge(e);
        let cell = edge.cell.unwrap();
        let (pval, _) = p_s.eval_p(cell, &epts);
        let pdofs = p_s.entity_dofs(cell);
        for (side, sign) in [(tp, 1.0), (tm.unwrap(), -1.0)] {
            let (uval, _) = u_s.eval_u(side, &epts);
            let udofs = u_s.entity_dofs(side);
            for (i, &ui) in udofs.iter().enumerate() {
                // a_S: + <tau . n, [v]>; tau . n = Legendre expansion of the
                // shared V edge dofs
                for m in 0..=k {
                    let mut val = 0.0;
                    for (q, &w) in ewts.iter().enumerate() {
                        val += w * leg[q][m] * uval[i][q];
                    }
                    let fj = v_s.dofs.free_index[v_edge_base + m].unwrap();
                    if let Some(fi) = uidx.free[ui] {
                        for comp in 0..2 {
                            sys.a_s
                                .push(comp * nf_us + fi, comp * nf_vs + fj, sign * val);
                        }
                    }
                }
                // b_S*: + <q, [v . n]>
                for (x, &pj) in pdofs.iter().enumerate() {
                    let mut val = 0.0;
                    for (q, &w) in ewts.iter().enumerate() {
                        val += w * pval[x][q] * uval[i][q];
                    }
                    for (comp, ncomp) in [(0usize, edge.normal.x), (1usize, edge.normal.y)] {
                        if let Some(fi) = uidx.free[ui] {
                            sys.b_s_star
                                .push(comp * nf_us + fi, pj, sign * val * ncomp);
                        }
                    }
                }
            }
        }
    }

    // primal (Fu) edges: a_S* and b_S terms
    for &e in &mesh.fu_edges {
        let edge = &mesh.edges[e];
        let interior = edge.is_interior();
        let on_gamma = edge.boundary_tag == Some(BoundaryTag::Interface);
        if !interior && !on_gamma {
            continue; // outer Dirichlet boundary: no form terms
        }
        let (lo, hi) = edge.endpoints(mesh);
        let (epts, ewts) = map_to_segment(seg_rule, lo, hi);
        let leg: Vec<Vec<f64>> = seg_rule
            .points
            .iter()
            .map(|s| edge_legendre(k, edge.length, s.x))
            .collect();
        let u_edge_base = u_s.dofs.edge_dof_base(e).unwrap();
        let (tp, tm) = mesh.d_of_edge(e);
        let sides: Vec<(usize, f64)> = if interior {
            vec![(tp, 1.0), (tm.unwrap(), -1.0)]
        } else {
            vec![(tp, 1.0)]
        };
        for &(side, sign) in &sides {
            let (vval, _) = v_s.eval_v(side, &epts);
            let vdofs = v_s.entity_dofs(side);
            let (pval, _) = p_s.eval_p(mesh.triangles[side].cell, &epts);
            let pdofs = p_s.entity_dofs(mesh.triangles[side].cell);
            for m in 0..=k {
                // a_S*: -<v, [tau n]> on interior edges, -<v, tau n_S> on the
                // interface; v is the Legendre expansion of the U edge dofs
                for (j, &vj) in vdofs.iter().enumerate() {
                    let fj = v_s.dofs.free_index[vj].unwrap();
                    let mut val = 0.0;
                    for (q, &w) in ewts.iter().enumerate() {
                        val += w * leg[q][m] * vval[j][q].dot(edge.normal);
                    }
                    for comp in 0..2 {
                        uidx.scatter(
                            &mut sys.a_s_star,
                            &mut sys.lift_a_s_star,
                            comp * nf_vs + fj,
                            u_edge_base + m,
                            comp,
                            -sign * val,
                        );
                    }
                }
                // b_S: -<v . n, [q]> on interior edges, -<v . n_S, q> on Gamma
                for (x, &pj) in pdofs.iter().enumerate() {
                    let mut val = 0.0;
                    for (q, &w) in ewts.iter().enumerate() {
                        val += w * leg[q][m] * pval[x][q];
                    }
                    for (comp, ncomp) in [(0usize, edge.normal.x), (1usize, edge.normal.y)] {
                        uidx.scatter(
                            &mut sys.b_s,
                            &mut sys.lift_b_s,
                            pj,
                            u_edge_base + m,
                            comp,
                            -sign * val * ncomp,
                        );
                    }
                }
            }
        }
    }
}

fn assemble_darcy(
    spaces: &CoupledSpaces,
    sys: &mut BlockSystem,
    tri_rule: &QuadRule,
    seg_rule: &QuadRule,
) {
    let mesh = &spaces.u_d.mesh;
    let k = spaces.k;
    let v_d = &spaces.v_d;
    let u_d = &spaces.u_d;
    let pidx = UIndex::build(u_d);

    // volume terms: a_D -(v, grad q); a_D* +(q, div v)
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.tri_points(t);
        let (pts, wts) = map_to_triangle(tri_rule, a, b, c);
        let (qval, qgrad) = u_d.eval_u(t, &pts);
        let (vval, vdiv) = v_d.eval_v(t, &pts);
        let qdofs = u_d.entity_dofs(t);
        let vdofs = v_d.entity_dofs(t);
        for (i, &qi) in qdofs.iter().enumerate() {
            for (j, &vj) in vdofs.iter().enumerate() {
                let fj = v_d.dofs.free_index[vj].unwrap();
                let mut grad_term = 0.0;
                let mut div_term = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    grad_term -= w * vval[j][q].dot(qgrad[i][q]);
                    div_term += w * vdiv[j][q] * qval[i][q];
                }
                if let Some(fi) = pidx.free[qi] {
                    sys.a_d.push(fi, fj, grad_term);
                }
                pidx.scatter(&mut sys.a_d_star, &mut sys.lift_a_d_star, fj, qi, 0, div_term);
            }
        }
    }

    // dual edges: a_D jump term + <v . n, [q]>
    for &e in &mesh.fp_edges {
        let edge = &mesh.edges[e];
        let (lo, hi) = edge.endpoints(mesh);
        let (epts, ewts) = map_to_segment(seg_rule, lo, hi);
        let leg: Vec<Vec<f64>> = seg_rule
            .points
            .iter()
            .map(|s| edge_legendre(k, edge.length, s.x))
            .collect();
        let v_edge_base = v_d.dofs.edge_dof_base(e).unwrap();
        let (tp, tm) = mesh.d_of_edge(e);
        for (side, sign) in [(tp, 1.0), (tm.unwrap(), -1.0)] {
            let (qval, _) = u_d.eval_u(side, &epts);
            let qdofs = u_d.entity_dofs(side);
            for (i, &qi) in qdofs.iter().enumerate() {
                let Some(fi) = pidx.free[qi] else { continue };
                for m in 0..=k {
                    let mut val = 0.0;
                    for (q, &w) in ewts.iter().enumerate() {
                        val += w * leg[q][m] * qval[i][q];
                    }
                    let fj = v_d.dofs.free_index[v_edge_base + m].unwrap();
                    sys.a_d.push(fi, fj, sign * val);
                }
            }
        }
    }

    // primal edges: a_D* terms on interior edges, the interface, and no-flux
    // outer edges (where the boundary pairing vanishes on the constrained
    // trial space but keeps the adjoint identity exact)
    for &e in &mesh.fu_edges {
        let edge = &mesh.edges[e];
        let interior = edge.is_interior();
        let on_gamma = edge.boundary_tag == Some(BoundaryTag::Interface);
        let on_noflux = spaces.noflux_edges.contains(&e);
        if !interior && !on_gamma && !on_noflux {
            continue;
        }
        let (lo, hi) = edge.endpoints(mesh);
        let (epts, ewts) = map_to_segment(seg_rule, lo, hi);
        let leg: Vec<Vec<f64>> = seg_rule
            .points
            .iter()
            .map(|s| edge_legendre(k, edge.length, s.x))
            .collect();
        let q_edge_base = u_d.dofs.edge_dof_base(e).unwrap();
        let (tp, tm) = mesh.d_of_edge(e);
        let sides: Vec<(usize, f64)> = if interior {
            vec![(tp, 1.0), (tm.unwrap(), -1.0)]
        } else {
            vec![(tp, 1.0)]
        };
        for &(side, sign) in &sides {
            let (vval, _) = v_d.eval_v(side, &epts);
            let vdofs = v_d.entity_dofs(side);
            for m in 0..=k {
                for (j, &vj) in vdofs.iter().enumerate() {
                    let fj = v_d.dofs.free_index[vj].unwrap();
                    let mut val = 0.0;
                    for (q, &w) in ewts.iter().enumerate() {
                        val += w * leg[q][m] * vval[j][q].dot(edge.normal);
                    }
                    pidx.scatter(
                        &mut sys.a_d_star,
                        &mut sys.lift_a_d_star,
                        fj,
                        q_edge_base + m,
                        0,
                        -sign * val,
                    );
                }
            }
        }
    }
}

fn assemble_interface(
    spaces: &CoupledSpaces,
    params: &PhysicalParams,
    glue: &InterfaceGlue,
    sys: &mut BlockSystem,
    seg_rule: &QuadRule,
) {
    let k = spaces.k;
    let u_s = &spaces.u_s;
    let u_d = &spaces.u_d;
    let mesh_s = &u_s.mesh;
    let mesh_d = &u_d.mesh;
    let uidx = UIndex::build(u_s);
    let pidx = UIndex::build(u_d);
    let nf_us = spaces.layout.nf_us;
    let n_s = glue.normal_s;

    // coupling blocks over the common refinement; both traces reduce to the
    // Legendre expansions of the interface edge dofs
    for seg in &glue.segments {
        let s_edge = &mesh_s.edges[seg.stokes_edge];
        let d_edge = &mesh_d.edges[seg.darcy_edge];
        let s_base = u_s.dofs.edge_dof_base(seg.stokes_edge).unwrap();
        let d_base = u_d.dofs.edge_dof_base(seg.darcy_edge).unwrap();
        let (s_lo, _) = s_edge.endpoints(mesh_s);
        let (d_lo, _) = d_edge.endpoints(mesh_d);
        let (s_hi_pt, _) = {
            let (a, b) = s_edge.endpoints(mesh_s);
            (b - a, 0)
        };
        let (d_hi_pt, _) = {
            let (a, b) = d_edge.endpoints(mesh_d);
            (b - a, 0)
        };
        let (pts, wts) = map_to_segment(seg_rule, seg.a, seg.b);
        for (q, &w) in wts.iter().enumerate() {
            let p = pts[q];
            // edge-local parameters on each side
            let ss = (p - s_lo).dot(s_hi_pt) / (s_edge.length * s_edge.length);
            let sd = (p - d_lo).dot(d_hi_pt) / (d_edge.length * d_edge.length);
            let leg_s = edge_legendre(k, s_edge.length, ss);
            let leg_d = edge_legendre(k, d_edge.length, sd);
            for m_s in 0..=k {
                for m_d in 0..=k {
                    let base = w * leg_s[m_s] * leg_d[m_d];
                    for (comp, ncomp) in [(0usize, n_s.x), (1usize, n_s.y)] {
                        let val = base * ncomp;
                        if val == 0.0 {
                            continue;
                        }
                        // rows v_S (test), cols p_D: +<p_D, v_S . n_S>
                        if let Some(fi) = uidx.free[s_base + m_s] {
                            let row = comp * nf_us + fi;
                            pidx.scatter(
                                &mut sys.c_pd_vs,
                                &mut sys.lift_c_pd_vs,
                                row,
                                d_base + m_d,
                                0,
                                val,
                            );
                        }
                        // rows q_D (test), cols u_S: -<u_S . n_S, q_D>
                        if let Some(fi) = pidx.free[d_base + m_d] {
                            uidx.scatter(
                                &mut sys.c_us_qd,
                                &mut sys.lift_c_us_qd,
                                fi,
                                s_base + m_s,
                                comp,
                                -val,
                            );
                        }
                    }
                }
            }
        }
    }

    // BJS slip term, Stokes side only: G <u_S . t, v_S . t>; by orthonormality
    // of the edge frame the edge-dof coupling is G t_c t_c' per moment
    let g = params.g_bjs;
    if g != 0.0 {
        let t = glue.tangent;
        for &e in &mesh_s.fu_edges {
            if mesh_s.edges[e].boundary_tag != Some(BoundaryTag::Interface) {
                continue;
            }
            let base = u_s.dofs.edge_dof_base(e).unwrap();
            for m in 0..=k {
                for comp_i in 0..2usize {
                    let ti = if comp_i == 0 { t.x } else { t.y };
                    let Some(fi) = uidx.free[base + m] else { continue };
                    for comp_j in 0..2usize {
                        let tj = if comp_j == 0 { t.x } else { t.y };
                        let val = g * ti * tj;
                        if val == 0.0 {
                            continue;
                        }
                        uidx.scatter(
                            &mut sys.c_bjs,
                            &mut sys.lift_c_bjs,
                            comp_i * nf_us + fi,
                            base + m,
                            comp_j,
                            val,
                        );
                    }
                }
            }
        }
    }
}

