//! The three staggered finite element spaces on a staggered mesh.

mod basis;
mod dofmap;
pub mod modal;

pub use basis::{build_basis, n_loc, n_rep, LocalBasis};
pub use dofmap::{build_dofmap, build_dofmap_with, DofClass, DofMap};
pub use crate::quadrature::{segment_rule, triangle_rule, QuadRule};

use crate::error::{Result, SdgError};
use crate::geometry::Vec2;
use crate::mesh::{BoundaryTag, Edge, StaggeredMesh};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Scalar space with Fu edge moments and interior moments; continuous
    /// across interior primal edges.
    U,
    /// Vector space with Fp normal moments and interior vector moments;
    /// normal-trace continuous across dual edges.
    V,
    /// Cellwise polynomial pressure space, no inter-cell coupling.
    P,
}

impl SpaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::U => "U",
            SpaceKind::V => "V",
            SpaceKind::P => "P",
        }
    }
}

/// A finite element space: mesh + numbering + local bases.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Arc<StaggeredMesh>,
    pub kind: SpaceKind,
    pub k: usize,
    pub dofs: DofMap,
    pub basis: LocalBasis,
}

impl FeSpace {
    pub fn build(
        mesh: Arc<StaggeredMesh>,
        kind: SpaceKind,
        k: usize,
        strong_zero_tags: &[BoundaryTag],
    ) -> Result<FeSpace> {
        let dofs = build_dofmap(&mesh, kind, k, strong_zero_tags)?;
        let basis = build_basis(&mesh, kind, k)?;
        Ok(FeSpace { mesh, kind, k, dofs, basis })
    }

    pub fn build_with(
        mesh: Arc<StaggeredMesh>,
        kind: SpaceKind,
        k: usize,
        constrain: &dyn Fn(&Edge) -> bool,
    ) -> Result<FeSpace> {
        let dofs = build_dofmap_with(&mesh, kind, k, constrain)?;
        let basis = build_basis(&mesh, kind, k)?;
        Ok(FeSpace { mesh, kind, k, dofs, basis })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    pub fn n_free(&self) -> usize {
        self.dofs.n_free
    }

    /// Local-to-global dof indices of triangle `t` (U, V) or cell `c` (P).
    pub fn entity_dofs(&self, entity: usize) -> &[usize] {
        &self.dofs.local_to_global[entity]
    }

    /// Values and gradients of the U shape functions of triangle `t` at the
    /// given physical points: `values[j][q]`, `grads[j][q]`.
    pub fn eval_u(&self, t: usize, pts: &[Vec2]) -> (Vec<Vec<f64>>, Vec<Vec<Vec2>>) {
        debug_assert_eq!(self.kind, SpaceKind::U);
        let frame = &self.basis.frames[t];
        let sh = &self.basis.shapes[t];
        let nl = n_loc(self.kind, self.k);
        let nr = n_rep(self.kind, self.k);
        let mut values = vec![vec![0.0; pts.len()]; nl];
        let mut grads = vec![vec![Vec2::default(); pts.len()]; nl];
        for (q, &p) in pts.iter().enumerate() {
            let modal = frame.eval(p);
            let mgrad = frame.eval_grad(p);
            for j in 0..nl {
                let mut v = 0.0;
                let mut g = Vec2::default();
                for m in 0..nr {
                    let c = sh[j * nr + m];
                    v += c * modal[m];
                    g = g + mgrad[m] * c;
                }
                values[j][q] = v;
                grads[j][q] = g;
            }
        }
        (values, grads)
    }

    /// Values and divergences of the V shape functions of triangle `t`.
    pub fn eval_v(&self, t: usize, pts: &[Vec2]) -> (Vec<Vec<Vec2>>, Vec<Vec<f64>>) {
        debug_assert_eq!(self.kind, SpaceKind::V);
        let frame = &self.basis.frames[t];
        let sh = &self.basis.shapes[t];
        let nl = n_loc(self.kind, self.k);
        let nm = frame.n;
        let mut values = vec![vec![Vec2::default(); pts.len()]; nl];
        let mut divs = vec![vec![0.0; pts.len()]; nl];
        for (q, &p) in pts.iter().enumerate() {
            let modal = frame.eval(p);
            let mgrad = frame.eval_grad(p);
            for j in 0..nl {
                let mut vx = 0.0;
                let mut vy = 0.0;
                let mut dv = 0.0;
                for m in 0..nm {
                    let cx = sh[j * 2 * nm + m];
                    let cy = sh[j * 2 * nm + nm + m];
                    vx += cx * modal[m];
                    vy += cy * modal[m];
                    dv += cx * mgrad[m].x + cy * mgrad[m].y;
                }
                values[j][q] = Vec2::new(vx, vy);
                divs[j][q] = dv;
            }
        }
        (values, divs)
    }

    /// Values and gradients of the P modal functions of cell `c`.
    pub fn eval_p(&self, c: usize, pts: &[Vec2]) -> (Vec<Vec<f64>>, Vec<Vec<Vec2>>) {
        debug_assert_eq!(self.kind, SpaceKind::P);
        let frame = &self.basis.frames[c];
        let n = frame.n;
        let mut values = vec![vec![0.0; pts.len()]; n];
        let mut grads = vec![vec![Vec2::default(); pts.len()]; n];
        for (q, &p) in pts.iter().enumerate() {
            let modal = frame.eval(p);
            let mgrad = frame.eval_grad(p);
            for j in 0..n {
                values[j][q] = modal[j];
                grads[j][q] = mgrad[j];
            }
        }
        (values, grads)
    }

    /// Shape values and gradients at reference-triangle points; the public
    /// evaluation entry point for U and V spaces.
    ///
    /// For V the "gradient" slot carries the divergence of each shape in its
    /// x component.
    pub fn eval_basis(
        &self,
        triangle: usize,
        ref_pts: &[Vec2],
    ) -> Result<(Vec<Vec<Vec2>>, Vec<Vec<Vec2>>)> {
        if triangle >= self.mesh.triangles.len() {
            return Err(SdgError::UnknownTriangle(triangle));
        }
        let [a, b, c] = self.mesh.tri_points(triangle);
        let phys: Vec<Vec2> = ref_pts
            .iter()
            .map(|r| a + (b - a) * r.x + (c - a) * r.y)
            .collect();
        match self.kind {
            SpaceKind::U => {
                let (vals, grads) = self.eval_u(triangle, &phys);
                let v = vals
                    .into_iter()
                    .map(|row| row.into_iter().map(|x| Vec2::new(x, 0.0)).collect())
                    .collect();
                Ok((v, grads))
            }
            SpaceKind::V => {
                let (vals, divs) = self.eval_v(triangle, &phys);
                let d = divs
                    .into_iter()
                    .map(|row| row.into_iter().map(|x| Vec2::new(x, 0.0)).collect())
                    .collect();
                Ok((vals, d))
            }
            SpaceKind::P => Err(SdgError::IncompatibleNorm {
                norm: "eval_basis".into(),
                space: "P (use eval_p per cell)".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femspace::modal::{dim_pk, edge_legendre};
    use crate::mesh::{
        build_staggered, generate_primal, MeshKind, PointRule, Rect, Side, Subdomain,
    };
    use crate::quadrature::{map_to_segment, map_to_triangle, segment_rule, triangle_rule};

    fn space(kind: SpaceKind, k: usize, nx: usize) -> FeSpace {
        let primal = generate_primal(
            &MeshKind::Distorted,
            nx,
            nx,
            Rect::new(0.0, 0.0, 1.0, 1.0),
            0.25,
            11,
            Subdomain::Stokes,
            Some(Side::Top),
        )
        .unwrap();
        let mesh = Arc::new(build_staggered(primal, PointRule::Centroid).unwrap());
        FeSpace::build(mesh, kind, k, &[]).unwrap()
    }

    /// Applies every dof functional of triangle `t` to every shape function by
    /// quadrature; returns the max deviation from the identity matrix.
    fn unisolvence_deviation(sp: &FeSpace, t: usize) -> f64 {
        let mesh = &sp.mesh;
        let k = sp.k;
        let tri = &mesh.triangles[t];
        let [a, b, c] = mesh.tri_points(t);
        let tri_rule = triangle_rule(2 * k + 4).unwrap();
        let seg_rule = segment_rule(2 * k + 3).unwrap();
        let (pts, wts) = map_to_triangle(&tri_rule, a, b, c);
        let nl = n_loc(sp.kind, k);
        let mut dev = 0.0f64;
        let mut mat = vec![0.0; nl * nl];
        match sp.kind {
            SpaceKind::U => {
                let (vals, _) = sp.eval_u(t, &pts);
                let edge = &mesh.edges[tri.fu_edge];
                let (lo, hi) = edge.endpoints(mesh);
                let (epts, ewts) = map_to_segment(&seg_rule, lo, hi);
                let (evals, _) = sp.eval_u(t, &epts);
                for (q, &w) in ewts.iter().enumerate() {
                    let leg = edge_legendre(k, edge.length, seg_rule.points[q].x);
                    for m in 0..=k {
                        for j in 0..nl {
                            mat[m * nl + j] += w * leg[m] * evals[j][q];
                        }
                    }
                }
                let frame = &sp.basis.frames[t];
                for (q, &w) in wts.iter().enumerate() {
                    let modal = frame.eval(pts[q]);
                    for m in 0..dim_pk(k - 1) {
                        for j in 0..nl {
                            mat[(k + 1 + m) * nl + j] += w * modal[m] * vals[j][q];
                        }
                    }
                }
            }
            SpaceKind::V => {
                let (vals, _) = sp.eval_v(t, &pts);
                for (slot, &e) in tri.fp_edges.iter().enumerate() {
                    let edge = &mesh.edges[e];
                    let (lo, hi) = edge.endpoints(mesh);
                    let (epts, ewts) = map_to_segment(&seg_rule, lo, hi);
                    let (evals, _) = sp.eval_v(t, &epts);
                    for (q, &w) in ewts.iter().enumerate() {
                        let leg = edge_legendre(k, edge.length, seg_rule.points[q].x);
                        for m in 0..=k {
                            for j in 0..nl {
                                mat[(slot * (k + 1) + m) * nl + j] +=
                                    w * leg[m] * evals[j][q].dot(edge.normal);
                            }
                        }
                    }
                }
                let frame = &sp.basis.frames[t];
                let base = 2 * (k + 1);
                for (q, &w) in wts.iter().enumerate() {
                    let modal = frame.eval(pts[q]);
                    for cc in 0..2usize {
                        for m in 0..dim_pk(k - 1) {
                            for j in 0..nl {
                                let comp = if cc == 0 { vals[j][q].x } else { vals[j][q].y };
                                mat[(base + cc * dim_pk(k - 1) + m) * nl + j] +=
                                    w * modal[m] * comp;
                            }
                        }
                    }
                }
            }
            SpaceKind::P => unreachable!(),
        }
        for i in 0..nl {
            for j in 0..nl {
                let expect = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((mat[i * nl + j] - expect).abs());
            }
        }
        dev
    }

    #[test]
    fn unisolvence_on_distorted_triangles() {
        for k in 1..=3 {
            for kind in [SpaceKind::U, SpaceKind::V] {
                let sp = space(kind, k, 4);
                let n = sp.mesh.triangles.len();
                // ~100 triangles on a distorted 4x4 grid (64 exist; check all)
                for t in 0..n {
                    let dev = unisolvence_deviation(&sp, t);
                    assert!(dev < 1e-9, "{kind:?} k={k} tri {t}: deviation {dev:.3e}");
                }
                assert!(sp.basis.cond_max < 1e8, "cond {:.3e}", sp.basis.cond_max);
            }
        }
    }

    #[test]
    fn constant_field_reproduced() {
        let sp = space(SpaceKind::U, 1, 2);
        // coefficients of the constant 1: edge moments <1, L_m>, interior (1, modal_m)
        let mut coeffs = vec![0.0; sp.n_dofs()];
        set_u_interpolant(&sp, &mut coeffs, |_| 1.0);
        for t in 0..sp.mesh.triangles.len() {
            let pts = [sp.mesh.tri_centroid(t)];
            let (vals, grads) = sp.eval_u(t, &pts);
            let loc = sp.entity_dofs(t);
            let mut v = 0.0;
            let mut g = Vec2::default();
            for (j, &d) in loc.iter().enumerate() {
                v += coeffs[d] * vals[j][0];
                g = g + grads[j][0] * coeffs[d];
            }
            assert!((v - 1.0).abs() < 1e-12);
            assert!(g.norm() < 1e-11);
        }
    }

    #[test]
    fn linear_field_reproduced_at_centroid() {
        let sp = space(SpaceKind::U, 1, 2);
        let mut coeffs = vec![0.0; sp.n_dofs()];
        set_u_interpolant(&sp, &mut coeffs, |p| p.x);
        for t in 0..sp.mesh.triangles.len() {
            let c = sp.mesh.tri_centroid(t);
            let (vals, _) = sp.eval_u(t, &[c]);
            let loc = sp.entity_dofs(t);
            let v: f64 = loc.iter().enumerate().map(|(j, &d)| coeffs[d] * vals[j][0]).sum();
            assert!((v - c.x).abs() < 1e-12, "triangle {t}: {v} vs {}", c.x);
        }
    }

    /// Fills U dof values of the interpolant of `f` by quadrature.
    fn set_u_interpolant(sp: &FeSpace, coeffs: &mut [f64], f: impl Fn(Vec2) -> f64) {
        let mesh = &sp.mesh;
        let k = sp.k;
        let seg_rule = segment_rule(2 * k + 4).unwrap();
        let tri_rule = triangle_rule(2 * k + 4).unwrap();
        for &e in &mesh.fu_edges {
            let edge = &mesh.edges[e];
            let (lo, hi) = edge.endpoints(mesh);
            let (epts, ewts) = map_to_segment(&seg_rule, lo, hi);
            let base = sp.dofs.edge_dof_base(e).unwrap();
            for (q, &w) in ewts.iter().enumerate() {
                let leg = edge_legendre(k, edge.length, seg_rule.points[q].x);
                for m in 0..=k {
                    coeffs[base + m] += w * leg[m] * f(epts[q]);
                }
            }
        }
        let n_int = dim_pk(k - 1);
        for (t, _) in mesh.triangles.iter().enumerate() {
            let [a, b, c] = mesh.tri_points(t);
            let (pts, wts) = map_to_triangle(&tri_rule, a, b, c);
            let frame = &sp.basis.frames[t];
            let loc = sp.entity_dofs(t);
            for (q, &w) in wts.iter().enumerate() {
                let modal = frame.eval(pts[q]);
                for m in 0..n_int {
                    coeffs[loc[k + 1 + m]] += w * modal[m] * f(pts[q]);
                }
            }
        }
    }

    #[test]
    fn staggered_continuity_of_shared_dofs() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let k = 2;
        let sp_u = space(SpaceKind::U, k, 3);
        let sp_v = space(SpaceKind::V, k, 3);
        let coeffs_u: Vec<f64> = (0..sp_u.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let coeffs_v: Vec<f64> = (0..sp_v.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let seg_rule = segment_rule(2 * k + 3).unwrap();
        let mesh = sp_u.mesh.clone();

        // U: moment jumps across interior Fu edges vanish
        for &e in &mesh.fu_interior {
            let edge = &mesh.edges[e];
            let (tp, tm) = mesh.d_of_edge(e);
            let (lo, hi) = edge.endpoints(&mesh);
            let (epts, ewts) = map_to_segment(&seg_rule, lo, hi);
            let (vp, _) = sp_u.eval_u(tp, &epts);
            let (vm, _) = sp_u.eval_u(tm.unwrap(), &epts);
            let lp = sp_u.entity_dofs(tp);
            let lm = sp_u.entity_dofs(tm.unwrap());
            for m in 0..=k {
                let mut moment = 0.0;
                for (q, &w) in ewts.iter().enumerate() {
                    let leg = edge_legendre(k, edge.length, seg_rule.points[q].x);
                    let up: f64 = lp.iter().enumerate().map(|(j, &d)| coeffs_u[d] * vp[j][q]).sum();
                    let um: f64 = lm.iter().enumerate().map(|(j, &d)| coeffs_u[d] * vm[j][q]).sum();
                    moment += w * leg[m] * (up - um);
                }
                assert!(moment.abs() < 1e-11, "U jump moment {moment:.3e} on edge {e}");
            }
        }

        // V: normal-moment jumps across Fp edges vanish
        for &e in &mesh.fp_edges {
            let edge = &mesh.edges[e];
            let (tp, tm) = mesh.d_of_edge(e);
            let (lo, hi) = edge.endpoints(&mesh);
            let (epts, ewts) = map_to_segment(&seg_rule, lo, hi);
            let (vp, _) = sp_v.eval_v(tp, &epts);
            let (vm, _) = sp_v.eval_v(tm.unwrap(), &epts);
            let lp = sp_v.entity_dofs(tp);
            let lm = sp_v.entity_dofs(tm.unwrap());
            for m in 0..=k {
                let mut moment = 0.0;
                for (q, &w) in ewts.iter().enumerate() {
                    let leg = edge_legendre(k, edge.length, seg_rule.points[q].x);
                    let np: f64 = lp
                        .iter()
                        .enumerate()
                        .map(|(j, &d)| coeffs_v[d] * vp[j][q].dot(edge.normal))
                        .sum();
                    let nm: f64 = lm
                        .iter()
                        .enumerate()
                        .map(|(j, &d)| coeffs_v[d] * vm[j][q].dot(edge.normal))
                        .sum();
                    moment += w * leg[m] * (np - nm);
                }
                assert!(moment.abs() < 1e-11, "V normal jump moment {moment:.3e} on edge {e}");
            }
        }
    }

    #[test]
    fn unknown_triangle_rejected() {
        let sp = space(SpaceKind::U, 1, 2);
        assert!(sp.eval_basis(10_000, &[Vec2::new(0.2, 0.2)]).is_err());
    }
}
