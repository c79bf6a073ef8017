//! Mesh-dependent norms of discrete fields and of errors against closed-form
//! references.
//!
//! The 3/2-power integrands of the Darcy energy norm are non-polynomial; they
//! are integrated with the standard Gauss rules at exactness 2k+3, which
//! biases absolute values at quadrature order but leaves rate slopes intact.

use super::DiscreteField;
use crate::cases::{ScalarFn, VectorFn};
use crate::error::{Result, SdgError};
use crate::femspace::SpaceKind;
use crate::geometry::Vec2;
use crate::mesh::Subdomain;
use crate::quadrature::{map_to_segment, map_to_triangle, segment_rule, triangle_rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    /// Broken H1 norm of a (possibly two-component) Stokes velocity field:
    /// gradients plus dual-edge jump penalties, summed over components.
    HBroken,
    /// Scalar version of the broken H1 norm (one component).
    ZS,
    /// Darcy energy norm with 3/2-power gradient and jump terms.
    ZD,
    /// Discrete L2 norm of a flux field with dual-edge normal traces.
    XSPrime,
    /// Pressure norm with dual-edge trace terms.
    PNorm,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::L2 => "L2",
            NormKind::HBroken => "h",
            NormKind::ZS => "Z_S",
            NormKind::ZD => "Z_D",
            NormKind::XSPrime => "X_S'",
            NormKind::PNorm => "P",
        }
    }
}

/// Closed-form reference paired with a discrete field in error norms.
pub enum ExactRef {
    /// Scalar value and gradient.
    Scalar(ScalarFn, VectorFn),
    /// Vector value (for V-space fields; L2 and X_S' norms only).
    Flux(VectorFn),
}

/// Norm of a discrete field itself.
pub fn compute_norm(field: &DiscreteField, kind: NormKind) -> Result<f64> {
    norm_impl(field, None, kind, None)
}

/// Norm of `exact - field`, for one component `comp` of the field (vector
/// norms over all components handle the combination at the call site;
/// `HBroken` here sums the components of `field` itself).
pub fn compute_error_norm(
    field: &DiscreteField,
    exact: &ExactRef,
    kind: NormKind,
    comp: usize,
) -> Result<f64> {
    norm_impl(field, Some(exact), kind, Some(comp))
}

fn check_space(field: &DiscreteField, kind: NormKind) -> Result<()> {
    let space = field.space.kind;
    let sub = field.space.mesh.subdomain();
    let ok = match kind {
        NormKind::L2 => true,
        NormKind::HBroken | NormKind::ZS => space == SpaceKind::U && sub == Subdomain::Stokes,
        NormKind::ZD => space == SpaceKind::U && sub == Subdomain::Darcy,
        NormKind::XSPrime => space == SpaceKind::V,
        NormKind::PNorm => space == SpaceKind::P,
    };
    if ok {
        Ok(())
    } else {
        Err(SdgError::IncompatibleNorm {
            norm: kind.as_str().into(),
            space: format!("{} on {:?} mesh", space.as_str(), sub),
        })
    }
}

fn norm_impl(
    field: &DiscreteField,
    exact: Option<&ExactRef>,
    kind: NormKind,
    comp: Option<usize>,
) -> Result<f64> {
    check_space(field, kind)?;
    let k = field.space.k;
    let mesh = field.space.mesh.clone();
    let tri = triangle_rule(2 * k + 4)?;
    let seg = segment_rule(2 * k + 3)?;
    let comps: Vec<usize> = match comp {
        Some(c) => vec![c],
        None => (0..field.components).collect(),
    };

    // subtracts the exact reference where present
    let scalar_err = |t: usize, pts: &[Vec2], c: usize| -> Vec<f64> {
        let mut vals = field.eval_scalar_comp(t, pts, c);
        if let Some(ExactRef::Scalar(f, _)) = exact {
            for (v, p) in vals.iter_mut().zip(pts) {
                *v = f(*p) - *v;
            }
        }
        vals
    };
    let grad_err = |t: usize, pts: &[Vec2], c: usize| -> Vec<Vec2> {
        let mut vals = field.eval_grad_comp(t, pts, c);
        if let Some(ExactRef::Scalar(_, g)) = exact {
            for (v, p) in vals.iter_mut().zip(pts) {
                *v = g(*p) - *v;
            }
        }
        vals
    };
    let vector_err = |t: usize, pts: &[Vec2], c: usize| -> Vec<Vec2> {
        let mut vals = field.eval_vector_comp(t, pts, c);
        if let Some(ExactRef::Flux(f)) = exact {
            for (v, p) in vals.iter_mut().zip(pts) {
                *v = f(*p) - *v;
            }
        }
        vals
    };

    let mut acc = 0.0f64;
    match kind {
        NormKind::L2 => {
            for t in 0..mesh.triangles.len() {
                let [a, b, cc] = mesh.tri_points(t);
                let (pts, wts) = map_to_triangle(&tri, a, b, cc);
                for &c in &comps {
                    match field.space.kind {
                        SpaceKind::V => {
                            let vals = vector_err(t, &pts, c);
                            for (q, &w) in wts.iter().enumerate() {
                                acc += w * vals[q].dot(vals[q]);
                            }
                        }
                        SpaceKind::U => {
                            let vals = scalar_err(t, &pts, c);
                            for (q, &w) in wts.iter().enumerate() {
                                acc += w * vals[q] * vals[q];
                            }
                        }
                        SpaceKind::P => {
                            let cell = mesh.triangles[t].cell;
                            let mut vals = field.eval_scalar_comp(cell, &pts, c);
                            if let Some(ExactRef::Scalar(f, _)) = exact {
                                for (v, p) in vals.iter_mut().zip(&pts) {
                                    *v = f(*p) - *v;
                                }
                            }
                            for (q, &w) in wts.iter().enumerate() {
                                acc += w * vals[q] * vals[q];
                            }
                        }
                    }
                }
            }
            Ok(acc.sqrt())
        }
        NormKind::HBroken | NormKind::ZS => {
            for &c in &comps {
                for t in 0..mesh.triangles.len() {
                    let [a, b, cc] = mesh.tri_points(t);
                    let (pts, wts) = map_to_triangle(&tri, a, b, cc);
                    let g = grad_err(t, &pts, c);
                    for (q, &w) in wts.iter().enumerate() {
                        acc += w * g[q].dot(g[q]);
                    }
                }
                for &e in &mesh.fp_edges {
                    let edge = &mesh.edges[e];
                    let (tp, tm) = mesh.d_of_edge(e);
                    let (lo, hi) = edge.endpoints(&mesh);
                    let (pts, wts) = map_to_segment(&seg, lo, hi);
                    let vp = scalar_err(tp, &pts, c);
                    let vm = scalar_err(tm.unwrap(), &pts, c);
                    let inv_h = 1.0 / edge.length;
                    for (q, &w) in wts.iter().enumerate() {
                        let jump = vp[q] - vm[q];
                        acc += w * inv_h * jump * jump;
                    }
                }
            }
            Ok(acc.sqrt())
        }
        NormKind::ZD => {
            let c = comps[0];
            for t in 0..mesh.triangles.len() {
                let [a, b, cc] = mesh.tri_points(t);
                let (pts, wts) = map_to_triangle(&tri, a, b, cc);
                let g = grad_err(t, &pts, c);
                for (q, &w) in wts.iter().enumerate() {
                    acc += w * g[q].norm().powf(1.5);
                }
            }
            for &e in &mesh.fp_edges {
                let edge = &mesh.edges[e];
                let (tp, tm) = mesh.d_of_edge(e);
                let (lo, hi) = edge.endpoints(&mesh);
                let (pts, wts) = map_to_segment(&seg, lo, hi);
                let vp = scalar_err(tp, &pts, c);
                let vm = scalar_err(tm.unwrap(), &pts, c);
                let scale = edge.length.powf(-0.5);
                for (q, &w) in wts.iter().enumerate() {
                    acc += w * scale * (vp[q] - vm[q]).abs().powf(1.5);
                }
            }
            Ok(acc.powf(2.0 / 3.0))
        }
        NormKind::XSPrime => {
            for &c in &comps {
                for t in 0..mesh.triangles.len() {
                    let [a, b, cc] = mesh.tri_points(t);
                    let (pts, wts) = map_to_triangle(&tri, a, b, cc);
                    let vals = vector_err(t, &pts, c);
                    for (q, &w) in wts.iter().enumerate() {
                        acc += w * vals[q].dot(vals[q]);
                    }
                }
                for &e in &mesh.fp_edges {
                    let edge = &mesh.edges[e];
                    let (lo, hi) = edge.endpoints(&mesh);
                    let (pts, wts) = map_to_segment(&seg, lo, hi);
                    // normal trace is single-valued; evaluate from the plus side
                    let vals = vector_err(edge.tri_plus, &pts, c);
                    for (q, &w) in wts.iter().enumerate() {
                        let vn = vals[q].dot(edge.normal);
                        acc += w * edge.length * vn * vn;
                    }
                }
            }
            Ok(acc.sqrt())
        }
        NormKind::PNorm => {
            let c = comps[0];
            for t in 0..mesh.triangles.len() {
                let cell = mesh.triangles[t].cell;
                let [a, b, cc] = mesh.tri_points(t);
                let (pts, wts) = map_to_triangle(&tri, a, b, cc);
                let vals = field.eval_scalar_comp(cell, &pts, c);
                for (q, &w) in wts.iter().enumerate() {
                    acc += w * vals[q] * vals[q];
                }
            }
            for &e in &mesh.fp_edges {
                let edge = &mesh.edges[e];
                let cell = edge.cell.unwrap();
                let (lo, hi) = edge.endpoints(&mesh);
                let (pts, wts) = map_to_segment(&seg, lo, hi);
                let vals = field.eval_scalar_comp(cell, &pts, c);
                for (q, &w) in wts.iter().enumerate() {
                    acc += w * edge.length * vals[q] * vals[q];
                }
            }
            Ok(acc.sqrt())
        }
    }
}
