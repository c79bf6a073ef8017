//! Global degree-of-freedom numbering for the three staggered spaces.
//!
//! * `U`: (k+1) moments on every primal (Fu) edge against an orthonormal
//!   Legendre frame, plus dim P_{k-1} interior moments per triangle. Edge
//!   moments are shared by the triangles of D(e), which realizes continuity
//!   across interior primal edges.
//! * `V`: (k+1) normal moments on every dual (Fp) edge plus 2 dim P_{k-1}
//!   interior vector moments per triangle; normal-trace continuity across
//!   dual edges.
//! * `P`: dim P_k modal coefficients per primal cell, no coupling.

use super::modal::dim_pk;
use super::SpaceKind;
use crate::error::{Result, SdgError};
use crate::mesh::{BoundaryTag, Edge, StaggeredMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofClass {
    /// Moment m on edge `edge` (a global edge index of the staggered mesh).
    EdgeMoment { edge: usize, m: usize },
    /// Interior moment m on triangle (U, V) or cell (P) `entity`.
    InteriorMoment { entity: usize, m: usize },
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub space: SpaceKind,
    pub k: usize,
    pub n_dofs: usize,
    /// Per triangle for U and V; per primal cell for P.
    pub local_to_global: Vec<Vec<usize>>,
    pub class: Vec<DofClass>,
    pub constrained: Vec<bool>,
    /// Compressed index among free dofs.
    pub free_index: Vec<Option<usize>>,
    pub n_free: usize,
    /// Position of each Fu (U) or Fp (V) edge in the edge-moment numbering.
    pub edge_slot: Vec<Option<usize>>,
}

impl DofMap {
    pub fn n_constrained(&self) -> usize {
        self.n_dofs - self.n_free
    }

    /// Compressed index among constrained dofs (for lift bookkeeping).
    pub fn constrained_index(&self, dof: usize) -> Option<usize> {
        if !self.constrained[dof] {
            return None;
        }
        // constrained dofs are sparse; a linear scan per call would be
        // quadratic, so the caller should prefer `constrained_list`.
        Some(self.constrained_list().iter().position(|&d| d == dof).unwrap())
    }

    pub fn constrained_list(&self) -> Vec<usize> {
        (0..self.n_dofs).filter(|&d| self.constrained[d]).collect()
    }

    /// First global dof of edge `e`, if the edge carries dofs in this space.
    pub fn edge_dof_base(&self, e: usize) -> Option<usize> {
        self.edge_slot[e].map(|slot| slot * (self.k + 1))
    }
}

/// Builds the numbering, constraining edge moments on boundary edges selected
/// by `strong_zero_tags` (meaningful for the U spaces; V and P carry no edge
/// constraints through this path).
pub fn build_dofmap(
    mesh: &StaggeredMesh,
    space: SpaceKind,
    k: usize,
    strong_zero_tags: &[BoundaryTag],
) -> Result<DofMap> {
    build_dofmap_with(mesh, space, k, &|edge: &Edge| {
        edge.boundary_tag
            .map(|t| strong_zero_tags.contains(&t))
            .unwrap_or(false)
    })
}

/// Predicate-based variant: `constrain` is consulted on boundary Fu edges.
pub fn build_dofmap_with(
    mesh: &StaggeredMesh,
    space: SpaceKind,
    k: usize,
    constrain: &dyn Fn(&Edge) -> bool,
) -> Result<DofMap> {
    if k == 0 {
        return Err(SdgError::UnsupportedOrder(0));
    }
    if k > 3 {
        return Err(SdgError::UnsupportedOrder(k));
    }
    let per_edge = k + 1;
    let n_int = dim_pk(k - 1);

    let mut edge_slot = vec![None; mesh.edges.len()];
    let mut class = Vec::new();
    let mut local_to_global: Vec<Vec<usize>>;
    let n_dofs;

    match space {
        SpaceKind::U => {
            for (slot, &e) in mesh.fu_edges.iter().enumerate() {
                edge_slot[e] = Some(slot);
                for m in 0..per_edge {
                    class.push(DofClass::EdgeMoment { edge: e, m });
                }
            }
            let interior_base = mesh.fu_edges.len() * per_edge;
            for (t, _) in mesh.triangles.iter().enumerate() {
                for m in 0..n_int {
                    class.push(DofClass::InteriorMoment { entity: t, m });
                }
                let _ = t;
            }
            n_dofs = class.len();
            local_to_global = Vec::with_capacity(mesh.triangles.len());
            for (t, tri) in mesh.triangles.iter().enumerate() {
                let mut loc = Vec::with_capacity(per_edge + n_int);
                let slot = edge_slot[tri.fu_edge].unwrap();
                loc.extend((0..per_edge).map(|m| slot * per_edge + m));
                loc.extend((0..n_int).map(|m| interior_base + t * n_int + m));
                local_to_global.push(loc);
            }
        }
        SpaceKind::V => {
            for (slot, &e) in mesh.fp_edges.iter().enumerate() {
                edge_slot[e] = Some(slot);
                for m in 0..per_edge {
                    class.push(DofClass::EdgeMoment { edge: e, m });
                }
            }
            let interior_base = mesh.fp_edges.len() * per_edge;
            for t in 0..mesh.triangles.len() {
                for m in 0..2 * n_int {
                    class.push(DofClass::InteriorMoment { entity: t, m });
                }
            }
            n_dofs = class.len();
            local_to_global = Vec::with_capacity(mesh.triangles.len());
            for (t, tri) in mesh.triangles.iter().enumerate() {
                let mut loc = Vec::with_capacity(2 * per_edge + 2 * n_int);
                for &e in &tri.fp_edges {
                    let slot = edge_slot[e].unwrap();
                    loc.extend((0..per_edge).map(|m| slot * per_edge + m));
                }
                loc.extend((0..2 * n_int).map(|m| interior_base + t * 2 * n_int + m));
                local_to_global.push(loc);
            }
        }
        SpaceKind::P => {
            let n_cell = dim_pk(k);
            for c in 0..mesh.primal.cells.len() {
                for m in 0..n_cell {
                    class.push(DofClass::InteriorMoment { entity: c, m });
                }
            }
            n_dofs = class.len();
            local_to_global = (0..mesh.primal.cells.len())
                .map(|c| (c * n_cell..(c + 1) * n_cell).collect())
                .collect();
        }
    }

    let mut constrained = vec![false; n_dofs];
    if space == SpaceKind::U {
        for &e in &mesh.fu_edges {
            let edge = &mesh.edges[e];
            if !edge.is_interior() && constrain(edge) {
                let slot = edge_slot[e].unwrap();
                for m in 0..per_edge {
                    constrained[slot * per_edge + m] = true;
                }
            }
        }
    }

    let mut free_index = vec![None; n_dofs];
    let mut n_free = 0;
    for d in 0..n_dofs {
        if !constrained[d] {
            free_index[d] = Some(n_free);
            n_free += 1;
        }
    }

    Ok(DofMap {
        space,
        k,
        n_dofs,
        local_to_global,
        class,
        constrained,
        free_index,
        n_free,
        edge_slot,
    })
}
