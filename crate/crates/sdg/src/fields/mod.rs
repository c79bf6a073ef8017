//! Discrete fields bound to a space, the moment-based interpolation
//! operators, the conforming nodal interpolant, and the mesh-dependent norms
//! and error measures.

mod norms;

pub use norms::{compute_error_norm, compute_norm, ExactRef, NormKind};

use crate::cases::ManufacturedCase;
use crate::error::{Result, SdgError};
use crate::femspace::modal::{dim_pk, edge_legendre, monomial_exponents};
use crate::femspace::{FeSpace, SpaceKind};
use crate::geometry::Vec2;
use crate::mesh::StaggeredMesh;
use crate::quadrature::{map_to_segment, map_to_triangle, segment_rule, triangle_rule};
use std::sync::Arc;

/// A coefficient vector bound to a space. Multi-component fields (the two
/// velocity components, or the two rows of the stress) store their
/// coefficients component-major: `coeffs[c * n_dofs + dof]`.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub space: Arc<FeSpace>,
    pub components: usize,
    pub coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(space: Arc<FeSpace>, components: usize) -> Self {
        let n = space.n_dofs() * components;
        DiscreteField { space, components, coeffs: vec![0.0; n] }
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let n = self.space.n_dofs();
        &self.coeffs[c * n..(c + 1) * n]
    }

    /// Pointwise difference of two fields on the same space.
    pub fn minus(&self, other: &DiscreteField) -> DiscreteField {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        DiscreteField {
            space: self.space.clone(),
            components: self.components,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> DiscreteField {
        DiscreteField {
            space: self.space.clone(),
            components: self.components,
            coeffs: self.coeffs.iter().map(|v| v * s).collect(),
        }
    }

    /// Values of component `c` of a U (per triangle) or P (per cell) field.
    pub fn eval_scalar_comp(&self, entity: usize, pts: &[Vec2], c: usize) -> Vec<f64> {
        let coeffs = self.comp(c);
        let loc = self.space.entity_dofs(entity);
        match self.space.kind {
            SpaceKind::U => {
                let (vals, _) = self.space.eval_u(entity, pts);
                dot_table(&vals, loc, coeffs)
            }
            SpaceKind::P => {
                let (vals, _) = self.space.eval_p(entity, pts);
                dot_table(&vals, loc, coeffs)
            }
            SpaceKind::V => panic!("scalar evaluation of a V field"),
        }
    }

    pub fn eval_grad_comp(&self, entity: usize, pts: &[Vec2], c: usize) -> Vec<Vec2> {
        let coeffs = self.comp(c);
        let loc = self.space.entity_dofs(entity);
        let grads = match self.space.kind {
            SpaceKind::U => self.space.eval_u(entity, pts).1,
            SpaceKind::P => self.space.eval_p(entity, pts).1,
            SpaceKind::V => panic!("scalar gradient of a V field"),
        };
        let mut out = vec![Vec2::default(); pts.len()];
        for (j, &d) in loc.iter().enumerate() {
            let cj = coeffs[d];
            if cj != 0.0 {
                for q in 0..pts.len() {
                    out[q] = out[q] + grads[j][q] * cj;
                }
            }
        }
        out
    }

    /// Values of component `c` (a row, for stress fields) of a V field.
    pub fn eval_vector_comp(&self, t: usize, pts: &[Vec2], c: usize) -> Vec<Vec2> {
        let coeffs = self.comp(c);
        let loc = self.space.entity_dofs(t);
        let (vals, _) = self.space.eval_v(t, pts);
        let mut out = vec![Vec2::default(); pts.len()];
        for (j, &d) in loc.iter().enumerate() {
            let cj = coeffs[d];
            if cj != 0.0 {
                for q in 0..pts.len() {
                    out[q] = out[q] + vals[j][q] * cj;
                }
            }
        }
        out
    }

    pub fn eval_vector(&self, t: usize, pts: &[Vec2]) -> Vec<Vec2> {
        self.eval_vector_comp(t, pts, 0)
    }

    /// Moment interpolant into a U space: edge moments against the Legendre
    /// frame and interior moments against the modal frame, by quadrature of
    /// exactness 2k+4.
    pub fn interpolate_ih(
        space: &Arc<FeSpace>,
        components: usize,
        f: impl Fn(Vec2, usize) -> f64,
    ) -> Result<DiscreteField> {
        if space.kind != SpaceKind::U {
            return Err(SdgError::IncompatibleNorm {
                norm: "I_h".into(),
                space: space.kind.as_str().into(),
            });
        }
        let mesh = space.mesh.clone();
        let k = space.k;
        let seg = segment_rule(2 * k + 4)?;
        let tri = triangle_rule(2 * k + 4)?;
        let mut field = DiscreteField::zeros(space.clone(), components);
        let n = space.n_dofs();
        for &e in &mesh.fu_edges {
            let edge = &mesh.edges[e];
            let (lo, hi) = edge.endpoints(&mesh);
            let (epts, ewts) = map_to_segment(&seg, lo, hi);
            let base = space.dofs.edge_dof_base(e).unwrap();
            for (q, &w) in ewts.iter().enumerate() {
                let leg = edge_legendre(k, edge.length, seg.points[q].x);
                for c in 0..components {
                    let fv = f(epts[q], c);
                    for m in 0..=k {
                        field.coeffs[c * n + base + m] += w * leg[m] * fv;
                    }
                }
            }
        }
        let n_int = dim_pk(k - 1);
        for t in 0..mesh.triangles.len() {
            let [a, b, cc] = mesh.tri_points(t);
            let (pts, wts) = map_to_triangle(&tri, a, b, cc);
            let frame = &space.basis.frames[t];
            let loc = space.entity_dofs(t);
            for (q, &w) in wts.iter().enumerate() {
                let modal = frame.eval(pts[q]);
                for c in 0..components {
                    let fv = f(pts[q], c);
                    for m in 0..n_int {
                        field.coeffs[c * n + loc[k + 1 + m]] += w * modal[m] * fv;
                    }
                }
            }
        }
        Ok(field)
    }

    /// Moment interpolant into a V space: normal moments on dual edges and
    /// interior vector moments.
    pub fn interpolate_jh(
        space: &Arc<FeSpace>,
        components: usize,
        f: impl Fn(Vec2, usize) -> Vec2,
    ) -> Result<DiscreteField> {
        if space.kind != SpaceKind::V {
            return Err(SdgError::IncompatibleNorm {
                norm: "J_h".into(),
                space: space.kind.as_str().into(),
            });
        }
        let mesh = space.mesh.clone();
        let k = space.k;
        let seg = segment_rule(2 * k + 4)?;
        let tri = triangle_rule(2 * k + 4)?;
        let mut field = DiscreteField::zeros(space.clone(), components);
        let n = space.n_dofs();
        for &e in &mesh.fp_edges {
            let edge = &mesh.edges[e];
            let (lo, hi) = edge.endpoints(&mesh);
            let (epts, ewts) = map_to_segment(&seg, lo, hi);
            let base = space.dofs.edge_dof_base(e).unwrap();
            for (q, &w) in ewts.iter().enumerate() {
                let leg = edge_legendre(k, edge.length, seg.points[q].x);
                for c in 0..components {
                    let fn_val = f(epts[q], c).dot(edge.normal);
                    for m in 0..=k {
                        field.coeffs[c * n + base + m] += w * leg[m] * fn_val;
                    }
                }
            }
        }
        let n_int = dim_pk(k - 1);
        for t in 0..mesh.triangles.len() {
            let [a, b, cc] = mesh.tri_points(t);
            let (pts, wts) = map_to_triangle(&tri, a, b, cc);
            let frame = &space.basis.frames[t];
            let loc = space.entity_dofs(t);
            let base = 2 * (k + 1);
            for (q, &w) in wts.iter().enumerate() {
                let modal = frame.eval(pts[q]);
                for c in 0..components {
                    let fv = f(pts[q], c);
                    for m in 0..n_int {
                        field.coeffs[c * n + loc[base + m]] += w * modal[m] * fv.x;
                        field.coeffs[c * n + loc[base + n_int + m]] += w * modal[m] * fv.y;
                    }
                }
            }
        }
        Ok(field)
    }

    /// Cellwise L2 projection into a P space.
    pub fn project_p(space: &Arc<FeSpace>, f: impl Fn(Vec2) -> f64) -> Result<DiscreteField> {
        if space.kind != SpaceKind::P {
            return Err(SdgError::IncompatibleNorm {
                norm: "P projection".into(),
                space: space.kind.as_str().into(),
            });
        }
        let mesh = space.mesh.clone();
        let tri = triangle_rule(2 * space.k + 4)?;
        let mut field = DiscreteField::zeros(space.clone(), 1);
        for (c, tris) in mesh.cell_triangles.iter().enumerate() {
            let frame = &space.basis.frames[c];
            let loc = space.entity_dofs(c);
            for &t in tris {
                let [a, b, cc] = mesh.tri_points(t);
                let (pts, wts) = map_to_triangle(&tri, a, b, cc);
                for (q, &w) in wts.iter().enumerate() {
                    let modal = frame.eval(pts[q]);
                    let fv = f(pts[q]);
                    for (m, &d) in loc.iter().enumerate() {
                        field.coeffs[d] += w * modal[m] * fv;
                    }
                }
            }
        }
        Ok(field)
    }
}

fn dot_table(vals: &[Vec<f64>], loc: &[usize], coeffs: &[f64]) -> Vec<f64> {
    let npts = vals.first().map(|v| v.len()).unwrap_or(0);
    let mut out = vec![0.0; npts];
    for (j, &d) in loc.iter().enumerate() {
        let cj = coeffs[d];
        if cj != 0.0 {
            for q in 0..npts {
                out[q] += cj * vals[j][q];
            }
        }
    }
    out
}

/// Conforming nodal (Lagrange) interpolant on the staggered triangulation,
/// stored as one polynomial per triangle. Shared lattice nodes receive the
/// same function values, so the interpolant is continuous.
#[derive(Debug, Clone)]
pub struct NodalField {
    pub mesh: Arc<StaggeredMesh>,
    pub k: usize,
    exps: Vec<(u32, u32)>,
    /// Per triangle: monomial coefficients in reference coordinates.
    tri_coeffs: Vec<Vec<f64>>,
}

/// Conforming finite element interpolation on the triangulation: matches `f`
/// at the degree-k lattice nodes of every triangle.
pub fn interpolate_pih(
    mesh: &Arc<StaggeredMesh>,
    k: usize,
    f: impl Fn(Vec2) -> f64,
) -> Result<NodalField> {
    if k == 0 || k > 3 {
        return Err(SdgError::UnsupportedOrder(k));
    }
    let exps = monomial_exponents(k);
    let n = exps.len();
    let mut tri_coeffs = Vec::with_capacity(mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.tri_points(t);
        // lattice nodes in barycentric steps of 1/k
        let mut rows = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for i in 0..=k {
            for j in 0..=(k - i) {
                let xi = i as f64 / k as f64;
                let eta = j as f64 / k as f64;
                let p = a + (b - a) * xi + (c - a) * eta;
                rows.push(
                    exps.iter()
                        .map(|&(ax, ay)| xi.powi(ax as i32) * eta.powi(ay as i32))
                        .collect::<Vec<f64>>(),
                );
                rhs.push(f(p));
            }
        }
        let coeffs = solve_square(n, &rows, &rhs).ok_or_else(|| {
            SdgError::AssemblyIntegrity(format!("singular nodal fit on triangle {t}"))
        })?;
        tri_coeffs.push(coeffs);
    }
    Ok(NodalField { mesh: mesh.clone(), k, exps, tri_coeffs })
}

impl NodalField {
    /// Values at physical points inside triangle `t`.
    pub fn eval(&self, t: usize, pts: &[Vec2]) -> Vec<f64> {
        let [a, b, c] = self.mesh.tri_points(t);
        let m = crate::geometry::Mat2::new(b.x - a.x, c.x - a.x, b.y - a.y, c.y - a.y);
        let inv = m.inverse().expect("affine map invertible");
        pts.iter()
            .map(|&p| {
                let r = inv.apply(p - a);
                self.exps
                    .iter()
                    .zip(&self.tri_coeffs[t])
                    .map(|(&(ax, ay), &cf)| cf * r.x.powi(ax as i32) * r.y.powi(ay as i32))
                    .sum()
            })
            .collect()
    }

    /// L2 distance to a reference function.
    pub fn l2_error(&self, f: impl Fn(Vec2) -> f64) -> f64 {
        let rule = triangle_rule(2 * self.k + 4).unwrap();
        let mut acc = 0.0;
        for t in 0..self.mesh.triangles.len() {
            let [a, b, c] = self.mesh.tri_points(t);
            let (pts, wts) = map_to_triangle(&rule, a, b, c);
            let vals = self.eval(t, &pts);
            for (q, &w) in wts.iter().enumerate() {
                let d = vals[q] - f(pts[q]);
                acc += w * d * d;
            }
        }
        acc.sqrt()
    }
}

fn solve_square(n: usize, rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let mut a: Vec<f64> = rows.iter().flatten().copied().collect();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col] / a[col * n + col];
                if f != 0.0 {
                    for j in col..n {
                        a[r * n + j] -= f * a[col * n + j];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i * n + i]).collect())
}

/// All error quantities reported by a convergence study.
#[derive(Debug, Clone, Default)]
pub struct ErrorRecord {
    pub sigma_l2: f64,
    pub u_s_l2: f64,
    pub p_s_l2: f64,
    pub u_d_l2: f64,
    pub p_d_l2: f64,
    pub u_s_h: f64,
    pub p_d_zd: f64,
    pub super_u_s: f64,
    pub super_p_d: f64,
}

/// Computes every reported error of a coupled solution against the exact
/// fields of a manufactured case. The stress reference is `-nu grad u_S`,
/// measured row-wise in L2.
pub fn compute_errors(
    sigma: &DiscreteField,
    u_s: &DiscreteField,
    p_s: &DiscreteField,
    u_d: &DiscreteField,
    p_d: &DiscreteField,
    case: &ManufacturedCase,
) -> Result<ErrorRecord> {
    let exact = case
        .exact
        .as_ref()
        .ok_or_else(|| SdgError::Config("case has no exact solution".into()))?;
    let nu = case.params.nu;

    let sigma_row = |row: usize| -> crate::cases::VectorFn {
        let grad = exact.grad_u_s.clone();
        Arc::new(move |p| {
            let g = grad(p);
            if row == 0 {
                Vec2::new(-nu * g.a, -nu * g.b)
            } else {
                Vec2::new(-nu * g.c, -nu * g.d)
            }
        })
    };
    let sigma_l2 = {
        let e0 = compute_error_norm(sigma, &ExactRef::Flux(sigma_row(0)), NormKind::L2, 0)?;
        let e1 = compute_error_norm(sigma, &ExactRef::Flux(sigma_row(1)), NormKind::L2, 1)?;
        (e0 * e0 + e1 * e1).sqrt()
    };

    let comp_scalar = |c: usize| -> ExactRef {
        let us = exact.u_s.clone();
        let g = exact.grad_u_s.clone();
        ExactRef::Scalar(
            Arc::new(move |p| if c == 0 { us(p).x } else { us(p).y }),
            Arc::new(move |p| {
                let m = g(p);
                if c == 0 {
                    Vec2::new(m.a, m.b)
                } else {
                    Vec2::new(m.c, m.d)
                }
            }),
        )
    };

    let u_s_l2 = {
        let e0 = compute_error_norm(u_s, &comp_scalar(0), NormKind::L2, 0)?;
        let e1 = compute_error_norm(u_s, &comp_scalar(1), NormKind::L2, 1)?;
        (e0 * e0 + e1 * e1).sqrt()
    };
    let u_s_h = {
        let e0 = compute_error_norm(u_s, &comp_scalar(0), NormKind::ZS, 0)?;
        let e1 = compute_error_norm(u_s, &comp_scalar(1), NormKind::ZS, 1)?;
        (e0 * e0 + e1 * e1).sqrt()
    };

    let p_s_l2 = compute_error_norm(
        p_s,
        &ExactRef::Scalar(exact.p_s.clone(), Arc::new(|_| Vec2::default())),
        NormKind::L2,
        0,
    )?;

    let u_d_l2 = compute_error_norm(u_d, &ExactRef::Flux(exact.u_d.clone()), NormKind::L2, 0)?;

    let pd_ref = ExactRef::Scalar(exact.p_d.clone(), exact.grad_p_d.clone());
    let p_d_l2 = compute_error_norm(p_d, &pd_ref, NormKind::L2, 0)?;
    let p_d_zd = compute_error_norm(p_d, &pd_ref, NormKind::ZD, 0)?;

    // superconvergent projected errors
    let us_f = exact.u_s.clone();
    let ih_us = DiscreteField::interpolate_ih(&u_s.space, 2, move |p, c| {
        let v = us_f(p);
        if c == 0 {
            v.x
        } else {
            v.y
        }
    })?;
    let super_u_s = compute_norm(&ih_us.minus(u_s), NormKind::HBroken)?;

    let pd_f = exact.p_d.clone();
    let ih_pd = DiscreteField::interpolate_ih(&p_d.space, 1, move |p, _| pd_f(p))?;
    let super_p_d = compute_norm(&ih_pd.minus(p_d), NormKind::ZD)?;

    Ok(ErrorRecord {
        sigma_l2,
        u_s_l2,
        p_s_l2,
        u_d_l2,
        p_d_l2,
        u_s_h,
        p_d_zd,
        super_u_s,
        super_p_d,
    })
}
