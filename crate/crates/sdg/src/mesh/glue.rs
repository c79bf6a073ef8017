//! Interface glue: the common 1-D refinement of the two subdomain interface
//! partitions, supporting nonmatching grids across the interface.

use super::{interface_axis, BoundaryTag, StaggeredMesh, Subdomain};
use crate::error::{Result, SdgError};
use crate::geometry::Vec2;

/// One sub-segment of the interface: the intersection of a Stokes interface
/// edge with a Darcy interface edge.
#[derive(Debug, Clone)]
pub struct SubSegment {
    pub stokes_tri: usize,
    pub darcy_tri: usize,
    pub stokes_edge: usize,
    pub darcy_edge: usize,
    pub a: Vec2,
    pub b: Vec2,
    pub length: f64,
}

/// Ordered interface decomposition with the fixed interface frame: `normal_s`
/// points from the Stokes into the Darcy subdomain and `tangent` is its
/// counterclockwise perpendicular.
#[derive(Debug, Clone)]
pub struct InterfaceGlue {
    pub segments: Vec<SubSegment>,
    pub normal_s: Vec2,
    pub tangent: Vec2,
    pub total_length: f64,
}

struct Trace {
    /// (start_param, end_param, edge_index, triangle) sorted by start.
    intervals: Vec<(f64, f64, usize, usize)>,
    lo: f64,
    hi: f64,
}

fn collect_trace(
    mesh: &StaggeredMesh,
    origin: Vec2,
    dir: Vec2,
    line_tol: f64,
) -> Result<Trace> {
    let mut intervals = Vec::new();
    for &e in &mesh.fu_edges {
        let edge = &mesh.edges[e];
        if edge.boundary_tag != Some(BoundaryTag::Interface) {
            continue;
        }
        let (a, b) = edge.endpoints(mesh);
        for p in [a, b] {
            let off = (p - origin).cross(dir).abs();
            if off > line_tol {
                return Err(SdgError::GeometryMismatch(format!(
                    "interface vertex ({}, {}) lies {off:.3e} off the interface line",
                    p.x, p.y
                )));
            }
        }
        let sa = (a - origin).dot(dir);
        let sb = (b - origin).dot(dir);
        intervals.push((sa.min(sb), sa.max(sb), e, edge.tri_plus));
    }
    if intervals.is_empty() {
        return Err(SdgError::GeometryMismatch(
            "mesh exposes no Interface-tagged edges".into(),
        ));
    }
    intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let lo = intervals.first().unwrap().0;
    let hi = intervals.iter().map(|iv| iv.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(Trace { intervals, lo, hi })
}

/// Builds the glue as the pairwise 1-D intersection of the two interface edge
/// partitions. Sub-segments shorter than `1e-12 * |Gamma|` are discarded.
pub fn build_interface_glue(
    stokes: &StaggeredMesh,
    darcy: &StaggeredMesh,
) -> Result<InterfaceGlue> {
    if stokes.subdomain() != Subdomain::Stokes || darcy.subdomain() != Subdomain::Darcy {
        return Err(SdgError::GeometryMismatch(
            "glue expects a Stokes mesh and a Darcy mesh".into(),
        ));
    }
    let s_pts = stokes.primal.interface_vertices();
    if s_pts.len() < 2 {
        return Err(SdgError::GeometryMismatch(
            "Stokes mesh exposes no interface".into(),
        ));
    }
    let (anchor, far) = interface_axis(&s_pts);
    let dir = (far - anchor).normalized();
    // collinearity tolerance, absolute (vertices within it are treated as on
    // the line; beyond it is a geometry mismatch)
    let line_tol = 1e-10;

    let s_trace = collect_trace(stokes, anchor, dir, line_tol)?;
    let d_trace = collect_trace(darcy, anchor, dir, line_tol)?;

    let span = s_trace.hi - s_trace.lo;
    if (s_trace.lo - d_trace.lo).abs() > line_tol || (s_trace.hi - d_trace.hi).abs() > line_tol {
        return Err(SdgError::GeometryMismatch(format!(
            "interface traces span [{:.6}, {:.6}] vs [{:.6}, {:.6}]",
            s_trace.lo, s_trace.hi, d_trace.lo, d_trace.hi
        )));
    }

    // n_S points from the Stokes side into the Darcy side: it is the outward
    // normal of any Stokes interface edge.
    let normal_s = stokes.edges[s_trace.intervals[0].2].normal;
    let tangent = normal_s.perp();

    let min_len = 1e-12 * span;
    let mut segments = Vec::new();
    let mut total = 0.0;
    for &(s0, s1, se, st) in &s_trace.intervals {
        for &(d0, d1, de, dt) in &d_trace.intervals {
            let lo = s0.max(d0);
            let hi = s1.min(d1);
            if hi - lo <= min_len {
                continue;
            }
            let a = anchor + dir * lo;
            let b = anchor + dir * hi;
            total += hi - lo;
            segments.push(SubSegment {
                stokes_tri: st,
                darcy_tri: dt,
                stokes_edge: se,
                darcy_edge: de,
                a,
                b,
                length: hi - lo,
            });
        }
    }
    segments.sort_by(|x, y| {
        (x.a - anchor)
            .dot(dir)
            .partial_cmp(&(y.a - anchor).dot(dir))
            .unwrap()
    });

    if (total - span).abs() > 1e-12 * span {
        return Err(SdgError::GeometryMismatch(format!(
            "sub-segment lengths sum to {total}, interface length {span}"
        )));
    }

    Ok(InterfaceGlue { segments, normal_s, tangent, total_length: total })
}
