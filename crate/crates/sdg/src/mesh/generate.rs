//! Structured primal-mesh generators: rectangular, triangular and randomly
//! distorted rectangular grids on an axis-aligned rectangle, plus the
//! polygonal text-file loader.

use super::{BoundaryTag, PrimalMesh, Subdomain};
use crate::error::{Result, SdgError};
use crate::geometry::{polygon_is_simple, polygon_signed_area, Vec2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// Which side of the rectangle carries the Interface tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Top,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshKind {
    Triangular,
    Rectangular,
    /// Rectangular grid with interior vertices perturbed by uniform random
    /// offsets of at most `distortion * min(dx, dy)`.
    Distorted,
    /// Read the primal mesh from a poly2d text file.
    PolygonalFile(PathBuf),
}

impl MeshKind {
    pub fn parse(s: &str) -> Option<MeshKind> {
        match s {
            "triangular" => Some(MeshKind::Triangular),
            "rectangular" => Some(MeshKind::Rectangular),
            "distorted" => Some(MeshKind::Distorted),
            other => other
                .strip_prefix("polygonal-file:")
                .map(|p| MeshKind::PolygonalFile(PathBuf::from(p))),
        }
    }
}

/// Generates a conforming primal mesh of `domain` with `nx` by `ny` cells.
/// The `interface_side`, when given, tags that side's boundary edges as
/// Interface; all remaining boundary edges are tagged by the subdomain.
/// Distortion is deterministic in `seed` and never moves boundary vertices.
#[allow(clippy::too_many_arguments)]
pub fn generate_primal(
    kind: &MeshKind,
    nx: usize,
    ny: usize,
    domain: Rect,
    distortion: f64,
    seed: u64,
    subdomain: Subdomain,
    interface_side: Option<Side>,
) -> Result<PrimalMesh> {
    if let MeshKind::PolygonalFile(path) = kind {
        let mut mesh = super::read_poly2d(path)?;
        mesh.subdomain = subdomain;
        mesh.validate()?;
        return Ok(mesh);
    }
    if nx == 0 || ny == 0 {
        return Err(SdgError::InvalidMesh("nx, ny must be >= 1".into()));
    }
    if !(0.0..0.5).contains(&distortion) {
        return Err(SdgError::InvalidMesh(format!(
            "distortion {distortion} outside [0, 0.5)"
        )));
    }
    let dx = domain.width() / nx as f64;
    let dy = domain.height() / ny as f64;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // exact endpoints on the last line so interfaces match bit-exactly
            let x = if i == nx { domain.x1 } else { domain.x0 + i as f64 * dx };
            let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * dy };
            vertices.push(Vec2::new(x, y));
        }
    }

    if matches!(kind, MeshKind::Distorted) && distortion > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp = distortion * dx.min(dy);
        for j in 1..ny {
            for i in 1..nx {
                let ox = rng.random_range(-amp..=amp);
                let oy = rng.random_range(-amp..=amp);
                let v = &mut vertices[vid(i, j)];
                v.x += ox;
                v.y += oy;
            }
        }
    }

    let mut cells: Vec<Vec<usize>> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let quad = vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)];
            match kind {
                MeshKind::Triangular => {
                    cells.push(vec![quad[0], quad[1], quad[2]]);
                    cells.push(vec![quad[0], quad[2], quad[3]]);
                }
                _ => cells.push(quad),
            }
        }
    }

    for (c, cell) in cells.iter().enumerate() {
        let pts: Vec<Vec2> = cell.iter().map(|&v| vertices[v]).collect();
        let area = polygon_signed_area(&pts);
        if !(area > 0.0) {
            return Err(SdgError::CellRejected {
                cell: c,
                reason: format!("inverted after distortion (area {area:.3e})"),
            });
        }
        if !polygon_is_simple(&pts) {
            return Err(SdgError::CellRejected {
                cell: c,
                reason: "self-intersecting after distortion".into(),
            });
        }
    }

    let outer_tag = match subdomain {
        Subdomain::Stokes => BoundaryTag::GammaS,
        Subdomain::Darcy => BoundaryTag::GammaD,
    };
    let mut boundary_tags = BTreeMap::new();
    let mut tag_edge = |a: usize, b: usize, tag: BoundaryTag| {
        boundary_tags.insert((a.min(b), a.max(b)), tag);
    };
    let side_tag = |side: Side| {
        if interface_side == Some(side) {
            BoundaryTag::Interface
        } else {
            outer_tag
        }
    };
    for i in 0..nx {
        tag_edge(vid(i, 0), vid(i + 1, 0), side_tag(Side::Bottom));
        tag_edge(vid(i, ny), vid(i + 1, ny), side_tag(Side::Top));
    }
    for j in 0..ny {
        tag_edge(vid(0, j), vid(0, j + 1), side_tag(Side::Left));
        tag_edge(vid(nx, j), vid(nx, j + 1), side_tag(Side::Right));
    }

    let mesh = PrimalMesh { subdomain, vertices, cells, boundary_tags };
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Rect {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn rectangular_2x2_counts() {
        let m = generate_primal(
            &MeshKind::Rectangular,
            2,
            2,
            unit(),
            0.0,
            0,
            Subdomain::Stokes,
            Some(Side::Top),
        )
        .unwrap();
        assert_eq!(m.cells.len(), 4);
        // 12 edges: 2x3 horizontal runs + 3x2 vertical runs
        let mut edges = std::collections::BTreeSet::new();
        for cell in &m.cells {
            for i in 0..cell.len() {
                let a = cell[i];
                let b = cell[(i + 1) % cell.len()];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        assert_eq!(edges.len(), 12);
        assert!((m.area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangular_2x2_has_eight_cells() {
        let m = generate_primal(
            &MeshKind::Triangular,
            2,
            2,
            unit(),
            0.0,
            0,
            Subdomain::Stokes,
            Some(Side::Top),
        )
        .unwrap();
        assert_eq!(m.cells.len(), 8);
        assert!((m.area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_distortion_is_identity() {
        let a = generate_primal(
            &MeshKind::Distorted,
            8,
            8,
            unit(),
            0.0,
            7,
            Subdomain::Darcy,
            Some(Side::Bottom),
        )
        .unwrap();
        let b = generate_primal(
            &MeshKind::Rectangular,
            8,
            8,
            unit(),
            0.0,
            0,
            Subdomain::Darcy,
            Some(Side::Bottom),
        )
        .unwrap();
        assert_eq!(a.vertices.len(), b.vertices.len());
        for (va, vb) in a.vertices.iter().zip(&b.vertices) {
            assert_eq!(va, vb);
        }
    }

    #[test]
    fn distortion_deterministic_and_boundary_fixed() {
        let a = generate_primal(
            &MeshKind::Distorted,
            4,
            4,
            unit(),
            0.3,
            42,
            Subdomain::Stokes,
            Some(Side::Top),
        )
        .unwrap();
        let b = generate_primal(
            &MeshKind::Distorted,
            4,
            4,
            unit(),
            0.3,
            42,
            Subdomain::Stokes,
            Some(Side::Top),
        )
        .unwrap();
        for (va, vb) in a.vertices.iter().zip(&b.vertices) {
            assert_eq!(va, vb, "distortion must be deterministic");
        }
        for j in 0..=4usize {
            for i in 0..=4usize {
                if i == 0 || i == 4 || j == 0 || j == 4 {
                    let v = a.vertices[j * 5 + i];
                    assert!((v.x * 4.0).fract().abs() < 1e-12);
                    assert!((v.y * 4.0).fract().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn excessive_distortion_rejected() {
        let err = generate_primal(
            &MeshKind::Distorted,
            4,
            4,
            unit(),
            0.6,
            1,
            Subdomain::Stokes,
            None,
        );
        assert!(err.is_err());
    }
}
