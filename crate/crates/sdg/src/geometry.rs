//! Small fixed-size vector/matrix types and polygon utilities used throughout
//! the mesh and assembly layers.

use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product `self x other`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A 2x2 matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn scale(s: f64) -> Self {
        Mat2::new(s, 0.0, 0.0, s)
    }

    pub fn det(self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn is_symmetric(self, tol: f64) -> bool {
        (self.b - self.c).abs() <= tol * (1.0 + self.b.abs().max(self.c.abs()))
    }

    /// Eigenvalues of a symmetric 2x2 matrix, smallest first.
    pub fn sym_eigenvalues(self) -> (f64, f64) {
        let tr = self.a + self.d;
        let off = 0.5 * (self.b + self.c);
        let disc = (0.5 * (self.a - self.d)).hypot(off);
        (0.5 * tr - disc, 0.5 * tr + disc)
    }

    /// Spectral norm of a symmetric 2x2 matrix.
    pub fn sym_spectral_norm(self) -> f64 {
        let (lo, hi) = self.sym_eigenvalues();
        lo.abs().max(hi.abs())
    }
}

/// Signed area of a polygon given by its vertices in order.
/// Positive for counterclockwise orientation.
pub fn polygon_signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    let mut twice = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        twice += p.cross(q);
    }
    0.5 * twice
}

/// Area-weighted centroid of a simple polygon.
pub fn polygon_centroid(pts: &[Vec2]) -> Vec2 {
    let n = pts.len();
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let w = p.cross(q);
        area2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Vec2::new(cx / (3.0 * area2), cy / (3.0 * area2))
}

/// Diameter: largest pairwise vertex distance.
pub fn polygon_diameter(pts: &[Vec2]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d = d.max(pts[i].dist(pts[j]));
        }
    }
    d
}

/// True if the polygon (any orientation-correct simple polygon, CCW assumed)
/// is simple, i.e. no two non-adjacent edges intersect.
pub fn polygon_is_simple(pts: &[Vec2]) -> bool {
    let n = pts.len();
    for i in 0..n {
        let (a1, a2) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 1)..n {
            // skip adjacent edges (they share a vertex)
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b1, b2) = (pts[j], pts[(j + 1) % n]);
            if segments_properly_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

fn segments_properly_intersect(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool {
    let d1 = (a2 - a1).cross(b1 - a1);
    let d2 = (a2 - a1).cross(b2 - a1);
    let d3 = (b2 - b1).cross(a1 - b1);
    let d4 = (b2 - b1).cross(a2 - b1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Signed distance margin of `p` to the kernel of the CCW polygon: the minimum
/// over all edges of the (signed, positive = inside) distance from `p` to the
/// edge line. Positive iff `p` lies strictly inside the kernel, i.e. the
/// polygon is star-shaped with respect to `p`.
pub fn kernel_margin(pts: &[Vec2], p: Vec2) -> f64 {
    let n = pts.len();
    let mut margin = f64::INFINITY;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let len = a.dist(b);
        let signed = (b - a).cross(p - a) / len;
        margin = margin.min(signed);
    }
    margin
}

/// Chebyshev center of the polygon kernel: the point maximizing the minimal
/// signed distance to all edge lines, found by inspecting constraint triples.
/// Returns (center, radius); radius <= 0 means the kernel is empty.
pub fn kernel_chebyshev_center(pts: &[Vec2]) -> (Vec2, f64) {
    let n = pts.len();
    // half-plane constraints n_i . x <= c_i - r, with n_i the inward... we use
    // the form a.x + b.y + r <= c per edge (unit inward distance).
    let mut cons = Vec::with_capacity(n);
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let t = (q - p).normalized();
        // inward normal for CCW polygon
        let nin = t.perp();
        // signed distance of x to edge line: nin . (x - p); require >= r
        cons.push((nin, nin.dot(p)));
    }
    let feasible = |x: Vec2| -> f64 {
        cons.iter()
            .map(|&(nin, c)| nin.dot(x) - c)
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = (polygon_centroid(pts), f64::NEG_INFINITY);
    let start = feasible(best.0);
    best.1 = start;
    // Candidate optima: equalize three constraints, or two constraints plus
    // unboundedness never occurs for closed polygons.
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if let Some(x) = equalize_three(cons[i], cons[j], cons[k]) {
                    let r = feasible(x);
                    if r > best.1 {
                        best = (x, r);
                    }
                }
            }
            if let Some(x) = equalize_two_max(cons[i], cons[j], &cons) {
                let r = feasible(x);
                if r > best.1 {
                    best = (x, r);
                }
            }
        }
    }
    best
}

/// Point where three constraints have equal slack: solve the 3x3 system
/// n_i.x - r = c_i.
fn equalize_three(
    c1: (Vec2, f64),
    c2: (Vec2, f64),
    c3: (Vec2, f64),
) -> Option<Vec2> {
    // unknowns x, y, r
    let rows = [c1, c2, c3];
    let mut m = [[0.0f64; 4]; 3];
    for (r, &(nin, c)) in rows.iter().enumerate() {
        m[r][0] = nin.x;
        m[r][1] = nin.y;
        m[r][2] = -1.0;
        m[r][3] = c;
    }
    solve3(&mut m).map(|sol| Vec2::new(sol[0], sol[1]))
}

/// Best point along the locus where two constraints are equal: project the
/// centroid-ish candidates; here we take the midpoint construction of the two
/// edge lines' bisector intersected with each remaining constraint.
fn equalize_two_max(
    c1: (Vec2, f64),
    c2: (Vec2, f64),
    all: &[(Vec2, f64)],
) -> Option<Vec2> {
    // Locus: (n1 - n2).x = c1 - c2 (line). Maximize min over remaining along
    // this line; sample where each remaining constraint becomes active too.
    let dn = c1.0 - c2.0;
    let dc = c1.1 - c2.1;
    if dn.norm() < 1e-14 {
        return None;
    }
    let mut best: Option<(Vec2, f64)> = None;
    for &(n3, c3) in all {
        let mut m = [
            [dn.x, dn.y, 0.0, dc],
            [c1.0.x, c1.0.y, -1.0, c1.1],
            [n3.x, n3.y, -1.0, c3],
        ];
        if let Some(sol) = solve3(&mut m) {
            let x = Vec2::new(sol[0], sol[1]);
            let r = all
                .iter()
                .map(|&(nin, c)| nin.dot(x) - c)
                .fold(f64::INFINITY, f64::min);
            if best.map(|(_, rb)| r > rb).unwrap_or(true) {
                best = Some((x, r));
            }
        }
    }
    best.map(|(x, _)| x)
}

fn solve3(m: &mut [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_area_and_centroid() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!((polygon_signed_area(&sq) - 1.0).abs() < 1e-15);
        let c = polygon_centroid(&sq);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        assert!((polygon_diameter(&sq) - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kernel_of_convex_polygon_contains_centroid() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(kernel_margin(&sq, Vec2::new(1.0, 0.5)) > 0.49);
        let (c, r) = kernel_chebyshev_center(&sq);
        assert!((r - 0.5).abs() < 1e-10, "chebyshev radius {r}");
        assert!((c.y - 0.5).abs() < 1e-10);
    }

    #[test]
    fn nonconvex_kernel_excludes_centroid_side() {
        // L-shaped hexagon; kernel is the lower-right square part.
        let l = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(kernel_margin(&l, Vec2::new(0.5, 0.5)) < 0.0);
        assert!(kernel_margin(&l, Vec2::new(1.5, 0.5)) > 0.0);
        let (c, r) = kernel_chebyshev_center(&l);
        assert!(r > 0.0);
        assert!(kernel_margin(&l, c) > 0.0);
    }

    #[test]
    fn self_intersection_detected() {
        let bow = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(!polygon_is_simple(&bow));
    }

    #[test]
    fn mat2_inverse_and_eigs() {
        let m = Mat2::new(2.0, 0.0, 0.0, 0.5);
        let inv = m.inverse().unwrap();
        assert!((inv.a - 0.5).abs() < 1e-15 && (inv.d - 2.0).abs() < 1e-15);
        let (lo, hi) = m.sym_eigenvalues();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
    }
}
