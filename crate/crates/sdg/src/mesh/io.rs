//! Text format for polygonal primal meshes.
//!
//! ```text
//! poly2d <nv> <nc>
//! x y                 (nv lines)
//! k i1 ... ik         (nc lines, 0-based CCW)
//! edge i j TAG        (one line per boundary edge)
//! ```
//!
//! Coordinates are written with shortest round-trip formatting, so writing
//! and re-reading reproduces every f64 bit-exactly.

use super::{BoundaryTag, PrimalMesh, Subdomain};
use crate::error::{Result, SdgError};
use crate::geometry::Vec2;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub fn write_poly2d(mesh: &PrimalMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("poly2d {} {}\n", mesh.vertices.len(), mesh.cells.len()));
    for v in &mesh.vertices {
        out.push_str(&format!("{} {}\n", v.x, v.y));
    }
    for cell in &mesh.cells {
        out.push_str(&cell.len().to_string());
        for &i in cell {
            out.push(' ');
            out.push_str(&i.to_string());
        }
        out.push('\n');
    }
    for (&(i, j), tag) in &mesh.boundary_tags {
        out.push_str(&format!("edge {} {} {}\n", i, j, tag.as_str()));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_poly2d(path: &Path) -> Result<PrimalMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_poly2d(&text)
}

pub fn parse_poly2d(text: &str) -> Result<PrimalMesh> {
    let bad = |msg: String| SdgError::Config(format!("poly2d: {msg}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let mut head = header.split_whitespace();
    if head.next() != Some("poly2d") {
        return Err(bad("missing poly2d header".into()));
    }
    let nv: usize = head
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad vertex count".into()))?;
    let nc: usize = head
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad cell count".into()))?;

    let mut vertices = Vec::with_capacity(nv);
    for k in 0..nv {
        let line = lines.next().ok_or_else(|| bad(format!("missing vertex {k}")))?;
        let mut it = line.split_whitespace();
        let x: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("vertex {k}: bad x")))?;
        let y: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("vertex {k}: bad y")))?;
        vertices.push(Vec2::new(x, y));
    }

    let mut cells = Vec::with_capacity(nc);
    for k in 0..nc {
        let line = lines.next().ok_or_else(|| bad(format!("missing cell {k}")))?;
        let mut it = line.split_whitespace();
        let sz: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("cell {k}: bad size")))?;
        let ids: Vec<usize> = it.map(|s| s.parse()).collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(format!("cell {k}: bad index")))?;
        if ids.len() != sz {
            return Err(bad(format!("cell {k}: expected {sz} indices, got {}", ids.len())));
        }
        if let Some(&out_of_range) = ids.iter().find(|&&i| i >= nv) {
            return Err(bad(format!("cell {k}: vertex {out_of_range} out of range")));
        }
        cells.push(ids);
    }

    let mut boundary_tags = BTreeMap::new();
    for line in lines {
        let mut it = line.split_whitespace();
        if it.next() != Some("edge") {
            return Err(bad(format!("unexpected trailer line: {line}")));
        }
        let i: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("edge line: bad i".into()))?;
        let j: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("edge line: bad j".into()))?;
        let tag = it
            .next()
            .and_then(BoundaryTag::parse)
            .ok_or_else(|| bad(format!("edge line: bad tag: {line}")))?;
        boundary_tags.insert((i.min(j), i.max(j)), tag);
    }

    Ok(PrimalMesh {
        subdomain: Subdomain::Stokes,
        vertices,
        cells,
        boundary_tags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primal, MeshKind, Rect, Side};

    #[test]
    fn roundtrip_is_bit_exact() {
        let mesh = generate_primal(
            &MeshKind::Distorted,
            5,
            3,
            Rect::new(0.0, 0.0, 1.0, 0.6),
            0.25,
            123,
            Subdomain::Stokes,
            Some(Side::Top),
        )
        .unwrap();
        let dir = std::env::temp_dir().join("sdg_poly2d_roundtrip.poly2d");
        write_poly2d(&mesh, &dir).unwrap();
        let back = read_poly2d(&dir).unwrap();
        assert_eq!(mesh.vertices.len(), back.vertices.len());
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
        assert_eq!(mesh.cells, back.cells);
        assert_eq!(mesh.boundary_tags, back.boundary_tags);
        // and the written text itself is stable
        let text1 = std::fs::read_to_string(&dir).unwrap();
        write_poly2d(&back, &dir).unwrap();
        let text2 = std::fs::read_to_string(&dir).unwrap();
        assert_eq!(text1, text2);
    }

    #[test]
    fn decimal_17_digits_roundtrip() {
        let text = "poly2d 3 1\n0.12345678901234567 0\n1 0\n0 1.0000000000000002\n3 0 1 2\nedge 0 1 GammaS\nedge 1 2 GammaS\nedge 0 2 GammaS\n";
        let mesh = parse_poly2d(text).unwrap();
        assert_eq!(mesh.vertices[0].x, 0.12345678901234567_f64);
        assert_eq!(mesh.vertices[2].y, 1.0000000000000002_f64);
    }

    #[test]
    fn malformed_header_rejected() {
        assert!(parse_poly2d("poly3d 1 1\n").is_err());
        assert!(parse_poly2d("poly2d 2\n").is_err());
    }
}
