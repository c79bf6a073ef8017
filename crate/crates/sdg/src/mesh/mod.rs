//! Staggered two-level meshes: a primal polygonal partition of each
//! subdomain, its simplicial subdivision obtained by connecting an interior
//! point of every cell to the cell vertices, and the interface glue between
//! the two (possibly nonmatching) subdomain meshes.

mod generate;
mod glue;
mod io;
mod staggered;

pub use generate::{generate_primal, MeshKind, Rect, Side};
pub use glue::{build_interface_glue, InterfaceGlue, SubSegment};
pub use io::{read_poly2d, write_poly2d};
pub use staggered::{build_staggered, check_regularity, PointRule, RegularityReport};

use crate::error::{Result, SdgError};
use crate::geometry::{polygon_is_simple, polygon_signed_area, Vec2};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subdomain {
    Stokes,
    Darcy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundaryTag {
    GammaS,
    GammaD,
    Interface,
}

impl BoundaryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::GammaS => "GammaS",
            BoundaryTag::GammaD => "GammaD",
            BoundaryTag::Interface => "Interface",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "GammaS" => Some(BoundaryTag::GammaS),
            "GammaD" => Some(BoundaryTag::GammaD),
            "Interface" => Some(BoundaryTag::Interface),
            _ => None,
        }
    }
}

/// The initial polygonal partition of one subdomain.
#[derive(Debug, Clone)]
pub struct PrimalMesh {
    pub subdomain: Subdomain,
    pub vertices: Vec<Vec2>,
    /// Counter-clockwise vertex index cycles, arbitrary polygon size >= 3.
    pub cells: Vec<Vec<usize>>,
    /// Tag per boundary edge, keyed by the sorted vertex pair.
    pub boundary_tags: BTreeMap<(usize, usize), BoundaryTag>,
}

impl PrimalMesh {
    pub fn cell_points(&self, cell: usize) -> Vec<Vec2> {
        self.cells[cell].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        polygon_signed_area(&self.cell_points(cell))
    }

    pub fn area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    /// Checks the structural invariants: simple positively oriented cells,
    /// one-or-two cells per edge, exactly one tag per boundary edge, and
    /// collinearity of the interface trace.
    pub fn validate(&self) -> Result<()> {
        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(SdgError::CellRejected {
                    cell: c,
                    reason: format!("only {} vertices", cell.len()),
                });
            }
            let pts = self.cell_points(c);
            let area = polygon_signed_area(&pts);
            if !(area > 0.0) {
                return Err(SdgError::CellRejected {
                    cell: c,
                    reason: format!("non-positive signed area {area:.3e}"),
                });
            }
            if !polygon_is_simple(&pts) {
                return Err(SdgError::CellRejected {
                    cell: c,
                    reason: "self-intersecting polygon".into(),
                });
            }
            for i in 0..cell.len() {
                let a = cell[i];
                let b = cell[(i + 1) % cell.len()];
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        for (&key, &count) in &edge_count {
            if count > 2 {
                return Err(SdgError::InvalidMesh(format!(
                    "edge {key:?} shared by {count} cells"
                )));
            }
            let tagged = self.boundary_tags.contains_key(&key);
            if count == 1 && !tagged {
                return Err(SdgError::InvalidMesh(format!(
                    "boundary edge {key:?} carries no tag"
                )));
            }
            if count == 2 && tagged {
                return Err(SdgError::InvalidMesh(format!(
                    "interior edge {key:?} carries a boundary tag"
                )));
            }
        }
        for &key in self.boundary_tags.keys() {
            if !edge_count.contains_key(&key) {
                return Err(SdgError::InvalidMesh(format!(
                    "tag on nonexistent edge {key:?}"
                )));
            }
        }
        self.check_interface_collinear()?;
        Ok(())
    }

    /// All interface vertices must lie on a single straight line within
    /// 1e-12 of the mesh diameter.
    fn check_interface_collinear(&self) -> Result<()> {
        let pts = self.interface_vertices();
        if pts.len() < 2 {
            return Ok(());
        }
        let (a, b) = interface_axis(&pts);
        let dir = (b - a).normalized();
        let diam = a.dist(b).max(1.0);
        for p in &pts {
            let off = (*p - a).cross(dir).abs();
            if off > 1e-12 * diam {
                return Err(SdgError::InvalidMesh(format!(
                    "interface vertex ({}, {}) off the interface line by {off:.3e}",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }

    pub fn interface_vertices(&self) -> Vec<Vec2> {
        let mut seen = std::collections::BTreeSet::new();
        for (&(a, b), &tag) in &self.boundary_tags {
            if tag == BoundaryTag::Interface {
                seen.insert(a);
                seen.insert(b);
            }
        }
        seen.iter().map(|&v| self.vertices[v]).collect()
    }
}

/// Endpoints of the longest span among the given points (the interface axis).
pub(crate) fn interface_axis(pts: &[Vec2]) -> (Vec2, Vec2) {
    let mut best = (pts[0], pts[1], 0.0f64);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = pts[i].dist(pts[j]);
            if d > best.2 {
                best = (pts[i], pts[j], d);
            }
        }
    }
    (best.0, best.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// A primal edge (edge of the initial partition).
    Fu,
    /// A dual edge created by the subdivision (from a primal vertex to the
    /// interior point of a cell).
    Fp,
}

/// An edge of the staggered triangulation with its fixed unit normal and the
/// one or two adjacent triangles. `tri_plus` is the triangle whose outward
/// normal on the edge coincides with `normal`; jumps are
/// `[v] = v_plus - v_minus`.
#[derive(Debug, Clone)]
pub struct Edge {
    pub kind: EdgeKind,
    /// Sorted endpoint indices into `StaggeredMesh::points`.
    pub vertices: [usize; 2],
    pub normal: Vec2,
    pub length: f64,
    pub tri_plus: usize,
    pub tri_minus: Option<usize>,
    /// Tag for boundary Fu edges.
    pub boundary_tag: Option<BoundaryTag>,
    /// Owning primal cell for Fp edges.
    pub cell: Option<usize>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.tri_minus.is_some()
    }

    pub fn endpoints(&self, mesh: &StaggeredMesh) -> (Vec2, Vec2) {
        (mesh.points[self.vertices[0]], mesh.points[self.vertices[1]])
    }
}

/// One triangle of the subdivision: a primal edge plus the interior point of
/// its cell. Every triangle has exactly one Fu edge and two Fp edges.
#[derive(Debug, Clone)]
pub struct Triangle {
    pub cell: usize,
    /// `v[0]`, `v[1]`: primal edge endpoints in CCW cell order; `v[2]`: interior point.
    pub v: [usize; 3],
    pub fu_edge: usize,
    pub fp_edges: [usize; 2],
    pub area: f64,
    pub diameter: f64,
}

/// The staggered mesh of one subdomain: the primal partition plus its
/// simplicial subdivision, edge sets and adjacency maps.
#[derive(Debug, Clone)]
pub struct StaggeredMesh {
    pub primal: PrimalMesh,
    /// Primal vertices followed by one interior point per cell.
    pub points: Vec<Vec2>,
    /// Index into `points` of the interior point of each cell.
    pub cell_point: Vec<usize>,
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    /// Indices into `edges`.
    pub fu_edges: Vec<usize>,
    pub fp_edges: Vec<usize>,
    pub fu_interior: Vec<usize>,
    /// S(nu): triangles of each primal cell.
    pub cell_triangles: Vec<Vec<usize>>,
    /// Mesh size: max triangle diameter.
    pub h: f64,
}

impl StaggeredMesh {
    pub fn subdomain(&self) -> Subdomain {
        self.primal.subdomain
    }

    pub fn tri_points(&self, t: usize) -> [Vec2; 3] {
        let tri = &self.triangles[t];
        [self.points[tri.v[0]], self.points[tri.v[1]], self.points[tri.v[2]]]
    }

    pub fn tri_centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.tri_points(t);
        (a + b + c) * (1.0 / 3.0)
    }

    /// D(e): the one or two triangles sharing edge `e`.
    pub fn d_of_edge(&self, e: usize) -> (usize, Option<usize>) {
        (self.edges[e].tri_plus, self.edges[e].tri_minus)
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    /// Boundary Fu edges carrying the given tag, in edge order.
    pub fn boundary_edges(&self, tag: BoundaryTag) -> Vec<usize> {
        self.fu_edges
            .iter()
            .copied()
            .filter(|&e| self.edges[e].boundary_tag == Some(tag))
            .collect()
    }

    /// Structural invariants of the subdivision. Called by `build_staggered`;
    /// exposed for tests.
    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.edges[tri.fu_edge].kind != EdgeKind::Fu {
                return Err(SdgError::InvalidMesh(format!("triangle {t} fu edge is Fp")));
            }
            for &e in &tri.fp_edges {
                if self.edges[e].kind != EdgeKind::Fp {
                    return Err(SdgError::InvalidMesh(format!("triangle {t} fp edge is Fu")));
                }
            }
        }
        for &e in &self.fp_edges {
            let edge = &self.edges[e];
            let Some(minus) = edge.tri_minus else {
                return Err(SdgError::InvalidMesh(format!("Fp edge {e} is not interior")));
            };
            if self.triangles[edge.tri_plus].cell != self.triangles[minus].cell {
                return Err(SdgError::InvalidMesh(format!(
                    "Fp edge {e} shared across two cells"
                )));
            }
        }
        for &e in &self.fu_interior {
            let edge = &self.edges[e];
            let Some(minus) = edge.tri_minus else {
                return Err(SdgError::InvalidMesh(format!("interior Fu edge {e} has one side")));
            };
            if self.triangles[edge.tri_plus].cell == self.triangles[minus].cell {
                return Err(SdgError::InvalidMesh(format!(
                    "interior Fu edge {e} inside a single cell"
                )));
            }
        }
        // partition of area, cell by cell
        for (c, tris) in self.cell_triangles.iter().enumerate() {
            let sum: f64 = tris.iter().map(|&t| self.triangles[t].area).sum();
            let cell_area = self.primal.cell_area(c);
            if (sum - cell_area).abs() > 1e-12 * cell_area.abs() {
                return Err(SdgError::InvalidMesh(format!(
                    "cell {c}: triangle areas sum to {sum}, cell area {cell_area}"
                )));
            }
        }
        Ok(())
    }
}
