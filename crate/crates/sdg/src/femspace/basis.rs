//! Local dual bases: shape functions dual to the edge-moment and
//! interior-moment functionals, expressed in the orthonormal modal frame of
//! each triangle (or cell, for the pressure space).

use super::modal::{dim_pk, edge_legendre, ModalFrame};
use super::SpaceKind;
use crate::error::{Result, SdgError};
use crate::geometry::{polygon_centroid, polygon_diameter};
use crate::mesh::StaggeredMesh;
use crate::quadrature::{map_to_segment, map_to_triangle, segment_rule, triangle_rule};

#[derive(Debug, Clone)]
pub struct LocalBasis {
    pub space: SpaceKind,
    pub k: usize,
    /// Per triangle for U/V, per primal cell for P.
    pub frames: Vec<ModalFrame>,
    /// Per triangle, column-major by shape: `shapes[t][j * n_rep + m]` is the
    /// coefficient of modal function m (component-major for V) in shape j.
    /// Empty for P, whose dofs are the modal coefficients themselves.
    pub shapes: Vec<Vec<f64>>,
    /// Worst 1-norm condition estimate of the dual-basis solves.
    pub cond_max: f64,
}

/// Number of modal representation coefficients per entity.
pub fn n_rep(space: SpaceKind, k: usize) -> usize {
    match space {
        SpaceKind::U | SpaceKind::P => dim_pk(k),
        SpaceKind::V => 2 * dim_pk(k),
    }
}

/// Number of local shape functions (= local dofs) per entity.
pub fn n_loc(space: SpaceKind, k: usize) -> usize {
    match space {
        SpaceKind::U => (k + 1) + dim_pk(k - 1),
        SpaceKind::V => 2 * (k + 1) + 2 * dim_pk(k - 1),
        SpaceKind::P => dim_pk(k),
    }
}

pub fn build_basis(mesh: &StaggeredMesh, space: SpaceKind, k: usize) -> Result<LocalBasis> {
    if k == 0 || k > 3 {
        return Err(SdgError::UnsupportedOrder(k));
    }
    let tri_rule = triangle_rule(2 * k + 4)?;
    let seg_rule = segment_rule(2 * k + 3)?;
    let mut frames = Vec::new();
    let mut shapes = Vec::new();
    let mut cond_max = 0.0f64;

    match space {
        SpaceKind::P => {
            for (c, _) in mesh.primal.cells.iter().enumerate() {
                let cell_pts = mesh.primal.cell_points(c);
                let center = polygon_centroid(&cell_pts);
                let scale = polygon_diameter(&cell_pts);
                let mut pts = Vec::new();
                let mut wts = Vec::new();
                for &t in &mesh.cell_triangles[c] {
                    let [a, b, nu] = mesh.tri_points(t);
                    let (p, w) = map_to_triangle(&tri_rule, a, b, nu);
                    pts.extend(p);
                    wts.extend(w);
                }
                frames.push(ModalFrame::build(k, center, scale, &pts, &wts));
            }
        }
        SpaceKind::U | SpaceKind::V => {
            let nl = n_loc(space, k);
            let nr = n_rep(space, k);
            let n_int = dim_pk(k - 1);
            for (t, tri) in mesh.triangles.iter().enumerate() {
                let [a, b, nu] = mesh.tri_points(t);
                let center = (a + b + nu) * (1.0 / 3.0);
                let scale = tri.diameter;
                let (pts, wts) = map_to_triangle(&tri_rule, a, b, nu);
                let frame = ModalFrame::build(k, center, scale, &pts, &wts);
                let nm = frame.n;

                // DOF-by-modal matrix D, row-major nl x nr
                let mut d = vec![0.0; nl * nr];
                let fill_edge_rows = |row0: usize, edge_id: usize, with_normal: bool, d: &mut [f64]| {
                    let edge = &mesh.edges[edge_id];
                    let (lo, hi) = edge.endpoints(mesh);
                    let (epts, ewts) = map_to_segment(&seg_rule, lo, hi);
                    for (q, (&w, p)) in ewts.iter().zip(&epts).enumerate() {
                        let s = seg_rule.points[q].x;
                        let leg = edge_legendre(k, edge.length, s);
                        let modal = frame.eval(*p);
                        for m in 0..=k {
                            for j in 0..nm {
                                if with_normal {
                                    // V: moments of v . n_e, component-major rep
                                    d[(row0 + m) * nr + j] += w * leg[m] * modal[j] * edge.normal.x;
                                    d[(row0 + m) * nr + nm + j] +=
                                        w * leg[m] * modal[j] * edge.normal.y;
                                } else {
                                    d[(row0 + m) * nr + j] += w * leg[m] * modal[j];
                                }
                            }
                        }
                    }
                };

                match space {
                    SpaceKind::U => {
                        fill_edge_rows(0, tri.fu_edge, false, &mut d);
                        // interior rows: (modal_j, modal_m), m < dim P_{k-1}
                        for (p, &w) in pts.iter().zip(&wts) {
                            let modal = frame.eval(*p);
                            for m in 0..n_int {
                                for j in 0..nm {
                                    d[(k + 1 + m) * nr + j] += w * modal[m] * modal[j];
                                }
                            }
                        }
                    }
                    SpaceKind::V => {
                        fill_edge_rows(0, tri.fp_edges[0], true, &mut d);
                        fill_edge_rows(k + 1, tri.fp_edges[1], true, &mut d);
                        let base = 2 * (k + 1);
                        for (p, &w) in pts.iter().zip(&wts) {
                            let modal = frame.eval(*p);
                            for c in 0..2usize {
                                for m in 0..n_int {
                                    let row = base + c * n_int + m;
                                    for j in 0..nm {
                                        d[row * nr + c * nm + j] += w * modal[m] * modal[j];
                                    }
                                }
                            }
                        }
                    }
                    SpaceKind::P => unreachable!(),
                }

                let (inv, cond) = invert_dense(nl, &d).ok_or_else(|| {
                    SdgError::AssemblyIntegrity(format!(
                        "singular dual-basis system on triangle {t}"
                    ))
                })?;
                cond_max = cond_max.max(cond);
                // column j of inv = modal coefficients of shape j
                let mut sh = vec![0.0; nl * nr];
                for j in 0..nl {
                    for m in 0..nr {
                        sh[j * nr + m] = inv[m * nl + j];
                    }
                }
                frames.push(frame);
                shapes.push(sh);
            }
        }
    }

    Ok(LocalBasis { space, k, frames, shapes, cond_max })
}

/// Dense inverse with partial pivoting; returns (inverse row-major, 1-norm
/// condition estimate).
fn invert_dense(n: usize, a: &[f64]) -> Option<(Vec<f64>, f64)> {
    let mut lu = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if lu[r * n + col].abs() > lu[piv * n + col].abs() {
                piv = r;
            }
        }
        if lu[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                lu.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
        }
        let d = lu[col * n + col];
        for j in 0..n {
            lu[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = lu[r * n + col];
                if f != 0.0 {
                    for j in 0..n {
                        lu[r * n + j] -= f * lu[col * n + j];
                        inv[r * n + j] -= f * inv[col * n + j];
                    }
                }
            }
        }
    }
    let norm1 = |m: &[f64]| {
        (0..n)
            .map(|j| (0..n).map(|i| m[i * n + j].abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    let cond = norm1(a) * norm1(&inv);
    Some((inv, cond))
}
