//! Subdivision of the primal partition into the staggered triangulation.

use super::{Edge, EdgeKind, PrimalMesh, StaggeredMesh, Triangle};
use crate::error::{Result, SdgError};
use crate::geometry::{
    kernel_chebyshev_center, kernel_margin, polygon_centroid, polygon_diameter, Vec2,
};
use std::collections::BTreeMap;

/// Choice of the interior point of each primal cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointRule {
    /// Area centroid. Valid whenever the cell is star-shaped about it.
    Centroid,
    /// Chebyshev center of the cell kernel; safe for strongly nonconvex cells.
    KernelIncenter,
}

/// Divides every primal cell into triangles by connecting the chosen interior
/// point to the cell vertices, and classifies all edges into the primal set
/// F_u and the dual set F_p.
pub fn build_staggered(primal: PrimalMesh, point_rule: PointRule) -> Result<StaggeredMesh> {
    primal.validate()?;
    let mut points = primal.vertices.clone();
    let mut cell_point = Vec::with_capacity(primal.cells.len());

    for (c, _) in primal.cells.iter().enumerate() {
        let pts = primal.cell_points(c);
        let nu = match point_rule {
            PointRule::Centroid => polygon_centroid(&pts),
            PointRule::KernelIncenter => kernel_chebyshev_center(&pts).0,
        };
        let margin = kernel_margin(&pts, nu);
        if margin <= 1e-12 * polygon_diameter(&pts) {
            return Err(SdgError::NonStarShaped { cell: c, margin });
        }
        cell_point.push(points.len());
        points.push(nu);
    }

    // Edge table keyed by sorted endpoint indices; tri_plus/minus resolved
    // after all triangles exist.
    let mut edge_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut adjacency: Vec<Vec<usize>> = Vec::new();
    let mut triangles: Vec<Triangle> = Vec::new();
    let mut cell_triangles: Vec<Vec<usize>> = vec![Vec::new(); primal.cells.len()];

    let mut intern_edge = |key: (usize, usize),
                           kind: EdgeKind,
                           cell: Option<usize>,
                           tri: usize,
                           edges: &mut Vec<Edge>,
                           adjacency: &mut Vec<Vec<usize>>|
     -> usize {
        let id = *edge_index.entry(key).or_insert_with(|| {
            let (a, b) = (points[key.0], points[key.1]);
            let dir = (b - a).normalized();
            edges.push(Edge {
                kind,
                vertices: [key.0, key.1],
                // fixed normal: clockwise perpendicular of the lo->hi direction
                normal: Vec2::new(dir.y, -dir.x),
                length: a.dist(b),
                tri_plus: usize::MAX,
                tri_minus: None,
                boundary_tag: None,
                cell,
            });
            adjacency.push(Vec::new());
            edges.len() - 1
        });
        adjacency[id].push(tri);
        id
    };

    for (c, cell) in primal.cells.iter().enumerate() {
        let nu_idx = cell_point[c];
        let n = cell.len();
        for i in 0..n {
            let a = cell[i];
            let b = cell[(i + 1) % n];
            let t = triangles.len();
            let pa = points[a];
            let pb = points[b];
            let pn = points[nu_idx];
            let area = 0.5 * (pb - pa).cross(pn - pa);
            let fu = intern_edge(
                (a.min(b), a.max(b)),
                EdgeKind::Fu,
                None,
                t,
                &mut edges,
                &mut adjacency,
            );
            let fp0 = intern_edge(
                (a.min(nu_idx), a.max(nu_idx)),
                EdgeKind::Fp,
                Some(c),
                t,
                &mut edges,
                &mut adjacency,
            );
            let fp1 = intern_edge(
                (b.min(nu_idx), b.max(nu_idx)),
                EdgeKind::Fp,
                Some(c),
                t,
                &mut edges,
                &mut adjacency,
            );
            triangles.push(Triangle {
                cell: c,
                v: [a, b, nu_idx],
                fu_edge: fu,
                fp_edges: [fp0, fp1],
                area,
                diameter: pa.dist(pb).max(pa.dist(pn)).max(pb.dist(pn)),
            });
            cell_triangles[c].push(t);
        }
    }

    // Resolve sides: tri_plus is the triangle the normal points away from.
    for (e, edge) in edges.iter_mut().enumerate() {
        let adj = &adjacency[e];
        let mid = (points[edge.vertices[0]] + points[edge.vertices[1]]) * 0.5;
        match adj.len() {
            1 => {
                let t = adj[0];
                let centroid = {
                    let tri = &triangles[t];
                    (points[tri.v[0]] + points[tri.v[1]] + points[tri.v[2]]) * (1.0 / 3.0)
                };
                // boundary edge: normal must point outward
                if edge.normal.dot(centroid - mid) > 0.0 {
                    edge.normal = -edge.normal;
                }
                edge.tri_plus = t;
                edge.boundary_tag = primal
                    .boundary_tags
                    .get(&(edge.vertices[0].min(edge.vertices[1]), edge.vertices[0].max(edge.vertices[1])))
                    .copied();
                if edge.kind == EdgeKind::Fu && edge.boundary_tag.is_none() {
                    return Err(SdgError::InvalidMesh(format!(
                        "untagged boundary edge {:?}",
                        edge.vertices
                    )));
                }
            }
            2 => {
                let c0 = {
                    let tri = &triangles[adj[0]];
                    (points[tri.v[0]] + points[tri.v[1]] + points[tri.v[2]]) * (1.0 / 3.0)
                };
                if edge.normal.dot(c0 - mid) < 0.0 {
                    edge.tri_plus = adj[0];
                    edge.tri_minus = Some(adj[1]);
                } else {
                    edge.tri_plus = adj[1];
                    edge.tri_minus = Some(adj[0]);
                }
            }
            n => {
                return Err(SdgError::InvalidMesh(format!(
                    "edge {:?} shared by {n} triangles",
                    edge.vertices
                )))
            }
        }
    }

    let mut fu_edges = Vec::new();
    let mut fp_edges = Vec::new();
    let mut fu_interior = Vec::new();
    for (e, edge) in edges.iter().enumerate() {
        match edge.kind {
            EdgeKind::Fu => {
                fu_edges.push(e);
                if edge.is_interior() {
                    fu_interior.push(e);
                }
            }
            EdgeKind::Fp => fp_edges.push(e),
        }
    }

    let h = triangles.iter().map(|t| t.diameter).fold(0.0f64, f64::max);
    let mesh = StaggeredMesh {
        primal,
        points,
        cell_point,
        triangles,
        edges,
        fu_edges,
        fp_edges,
        fu_interior,
        cell_triangles,
        h,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Mesh regularity report: minimum edge/diameter ratio and minimum
/// star-shapedness (inscribed-ball) ratio over all primal cells.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub min_edge_ratio: f64,
    pub min_ball_ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn check_regularity(mesh: &StaggeredMesh, rho_threshold: f64) -> RegularityReport {
    let mut min_edge_ratio = f64::INFINITY;
    let mut min_ball_ratio = f64::INFINITY;
    for (c, cell) in mesh.primal.cells.iter().enumerate() {
        let pts = mesh.primal.cell_points(c);
        let diam = polygon_diameter(&pts);
        for i in 0..cell.len() {
            let a = pts[i];
            let b = pts[(i + 1) % pts.len()];
            min_edge_ratio = min_edge_ratio.min(a.dist(b) / diam);
        }
        let (_, radius) = kernel_chebyshev_center(&pts);
        min_ball_ratio = min_ball_ratio.min(radius / diam);
    }
    RegularityReport {
        min_edge_ratio,
        min_ball_ratio,
        threshold: rho_threshold,
        pass: min_edge_ratio >= rho_threshold && min_ball_ratio >= rho_threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primal, BoundaryTag, MeshKind, Rect, Side, Subdomain};

    fn unit() -> Rect {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    }

    fn staggered(kind: MeshKind, nx: usize, ny: usize) -> StaggeredMesh {
        let primal = generate_primal(
            &kind,
            nx,
            ny,
            unit(),
            0.0,
            0,
            Subdomain::Stokes,
            Some(Side::Top),
        )
        .unwrap();
        build_staggered(primal, PointRule::Centroid).unwrap()
    }

    #[test]
    fn rect_2x2_edge_bookkeeping() {
        let m = staggered(MeshKind::Rectangular, 2, 2);
        assert_eq!(m.triangles.len(), 16);
        assert_eq!(m.fp_edges.len(), 16);
        assert_eq!(m.fu_edges.len(), 12);
        assert_eq!(m.fu_interior.len(), 4);
        assert!((m.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_square_centroid_gives_congruent_quarters() {
        let m = staggered(MeshKind::Rectangular, 1, 1);
        assert_eq!(m.triangles.len(), 4);
        for t in &m.triangles {
            assert!((t.area - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn triangular_cell_partition() {
        let m = staggered(MeshKind::Triangular, 1, 1);
        assert_eq!(m.primal.cells.len(), 2);
        assert_eq!(m.triangles.len(), 6);
        for (c, tris) in m.cell_triangles.iter().enumerate() {
            assert_eq!(tris.len(), 3);
            let sum: f64 = tris.iter().map(|&t| m.triangles[t].area).sum();
            assert!((sum - m.primal.cell_area(c)).abs() < 1e-12);
        }
    }

    #[test]
    fn fp_count_equals_total_cell_vertices() {
        for (kind, nx) in [(MeshKind::Rectangular, 3), (MeshKind::Triangular, 2)] {
            let m = staggered(kind, nx, nx);
            let expect: usize = m.primal.cells.iter().map(|c| c.len()).sum();
            assert_eq!(m.fp_edges.len(), expect);
        }
    }

    #[test]
    fn boundary_normals_point_outward() {
        let m = staggered(MeshKind::Rectangular, 2, 2);
        for &e in &m.fu_edges {
            let edge = &m.edges[e];
            if edge.is_interior() {
                continue;
            }
            let (a, b) = edge.endpoints(&m);
            let mid = (a + b) * 0.5;
            let out = mid + edge.normal * 1e-3;
            assert!(
                out.x < -1e-9 || out.x > 1.0 + 1e-9 || out.y < -1e-9 || out.y > 1.0 + 1e-9,
                "normal of boundary edge {e} points inward"
            );
        }
    }

    #[test]
    fn uniform_square_regularity() {
        let m = staggered(MeshKind::Rectangular, 4, 4);
        let report = check_regularity(&m, 0.0);
        assert!(report.pass);
        assert!((report.min_edge_ratio - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn distorted_regularity_passes_at_low_threshold() {
        let primal = generate_primal(
            &MeshKind::Distorted,
            8,
            8,
            unit(),
            0.3,
            7,
            Subdomain::Stokes,
            Some(Side::Top),
        )
        .unwrap();
        let m = build_staggered(primal, PointRule::Centroid).unwrap();
        let report = check_regularity(&m, 0.1);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn interface_edges_tagged() {
        let m = staggered(MeshKind::Rectangular, 4, 4);
        let gamma = m.boundary_edges(BoundaryTag::Interface);
        assert_eq!(gamma.len(), 4);
        for e in gamma {
            let (a, b) = m.edges[e].endpoints(&m);
            assert!((a.y - 1.0).abs() < 1e-14 && (b.y - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn nonconvex_cell_requires_kernel_point() {
        // L-shaped single cell: centroid lies outside the kernel.
        let l = PrimalMesh {
            subdomain: Subdomain::Stokes,
            vertices: vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(2.0, 0.0),
                Vec2::new(2.0, 2.0),
                Vec2::new(1.2, 2.0),
                Vec2::new(1.2, 0.4),
                Vec2::new(0.0, 0.4),
            ],
            cells: vec![vec![0, 1, 2, 3, 4, 5]],
            boundary_tags: [
                ((0, 1), BoundaryTag::GammaS),
                ((1, 2), BoundaryTag::GammaS),
                ((2, 3), BoundaryTag::GammaS),
                ((3, 4), BoundaryTag::GammaS),
                ((4, 5), BoundaryTag::GammaS),
                ((0, 5), BoundaryTag::GammaS),
            ]
            .into_iter()
            .collect(),
        };
        let centroid = build_staggered(l.clone(), PointRule::Centroid);
        assert!(matches!(centroid, Err(SdgError::NonStarShaped { .. })));
        let incenter = build_staggered(l, PointRule::KernelIncenter).unwrap();
        assert_eq!(incenter.triangles.len(), 6);
    }
}
