//! Orthonormal polynomial frames: a modal frame per triangle/cell obtained by
//! Cholesky orthonormalization of scaled-centroid monomials, and orthonormal
//! Legendre frames on physical edges with a globally fixed orientation.

use crate::geometry::Vec2;

/// dim P_k in two variables.
pub const fn dim_pk(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Graded monomial exponents (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
pub fn monomial_exponents(k: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(dim_pk(k));
    for deg in 0..=k as u32 {
        for b in 0..=deg {
            out.push((deg - b, b));
        }
    }
    out
}

/// Orthonormal modal frame over one integration domain (a triangle or a
/// polygonal cell). Modal functions are lower-triangular combinations of the
/// scaled-centroid monomials X^a Y^b, X = (x - cx)/scale, Y = (y - cy)/scale,
/// so the first dim_pk(k-1) functions span P_{k-1} exactly.
#[derive(Debug, Clone)]
pub struct ModalFrame {
    pub center: Vec2,
    pub scale: f64,
    pub exps: Vec<(u32, u32)>,
    /// Row-major lower-triangular n x n: modal_i = sum_j r[i*n+j] mono_j.
    pub r: Vec<f64>,
    pub n: usize,
}

impl ModalFrame {
    /// Orthonormalizes monomials against the inner product induced by the
    /// quadrature points/weights (which must integrate degree 2k exactly over
    /// the domain).
    pub fn build(k: usize, center: Vec2, scale: f64, pts: &[Vec2], wts: &[f64]) -> ModalFrame {
        let exps = monomial_exponents(k);
        let n = exps.len();
        // Gram matrix of monomials
        let mono_tab: Vec<Vec<f64>> = pts
            .iter()
            .map(|&p| eval_monomials(&exps, center, scale, p))
            .collect();
        let mut gram = vec![0.0; n * n];
        for (row, w) in mono_tab.iter().zip(wts) {
            for i in 0..n {
                for j in 0..=i {
                    gram[i * n + j] += w * row[i] * row[j];
                }
            }
        }
        // Cholesky G = L L^T (lower)
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = gram[i * n + j];
                for m in 0..j {
                    s -= l[i * n + m] * l[j * n + m];
                }
                if i == j {
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        // R = L^-1 by forward substitution, row by row
        let mut r = vec![0.0; n * n];
        for i in 0..n {
            r[i * n + i] = 1.0 / l[i * n + i];
            for j in (0..i).rev() {
                let mut s = 0.0;
                for m in (j + 1)..=i {
                    s += l[m * n + j] * r[i * n + m];
                }
                r[i * n + j] = -s / l[j * n + j];
            }
        }
        ModalFrame { center, scale, exps, r, n }
    }

    /// Values of all modal functions at a physical point.
    pub fn eval(&self, p: Vec2) -> Vec<f64> {
        let mono = eval_monomials(&self.exps, self.center, self.scale, p);
        (0..self.n)
            .map(|i| (0..=i).map(|j| self.r[i * self.n + j] * mono[j]).sum())
            .collect()
    }

    /// Gradients of all modal functions at a physical point.
    pub fn eval_grad(&self, p: Vec2) -> Vec<Vec2> {
        let grads = eval_monomial_grads(&self.exps, self.center, self.scale, p);
        (0..self.n)
            .map(|i| {
                let mut g = Vec2::default();
                for j in 0..=i {
                    g = g + grads[j] * self.r[i * self.n + j];
                }
                g
            })
            .collect()
    }
}

pub fn eval_monomials(exps: &[(u32, u32)], center: Vec2, scale: f64, p: Vec2) -> Vec<f64> {
    let x = (p.x - center.x) / scale;
    let y = (p.y - center.y) / scale;
    exps.iter()
        .map(|&(a, b)| x.powi(a as i32) * y.powi(b as i32))
        .collect()
}

pub fn eval_monomial_grads(exps: &[(u32, u32)], center: Vec2, scale: f64, p: Vec2) -> Vec<Vec2> {
    let x = (p.x - center.x) / scale;
    let y = (p.y - center.y) / scale;
    exps.iter()
        .map(|&(a, b)| {
            let gx = if a == 0 {
                0.0
            } else {
                a as f64 * x.powi(a as i32 - 1) * y.powi(b as i32) / scale
            };
            let gy = if b == 0 {
                0.0
            } else {
                b as f64 * x.powi(a as i32) * y.powi(b as i32 - 1) / scale
            };
            Vec2::new(gx, gy)
        })
        .collect()
}

/// Orthonormal Legendre values L_0..L_k on an edge of length `h` at parameter
/// `s` in [0, 1] measured from the lower-indexed endpoint.
pub fn edge_legendre(k: usize, h: f64, s: f64) -> Vec<f64> {
    let t = 2.0 * s - 1.0;
    let mut p = Vec::with_capacity(k + 1);
    let mut p0 = 1.0;
    let mut p1 = t;
    for m in 0..=k {
        let val = match m {
            0 => 1.0,
            1 => t,
            _ => {
                let mf = m as f64;
                let p2 = ((2.0 * mf - 1.0) * t * p1 - (mf - 1.0) * p0) / mf;
                p0 = p1;
                p1 = p2;
                p2
            }
        };
        p.push(val * ((2.0 * m as f64 + 1.0) / h).sqrt());
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{map_to_triangle, triangle_rule};

    #[test]
    fn modal_frame_is_orthonormal() {
        let a = Vec2::new(0.1, 0.2);
        let b = Vec2::new(1.3, 0.4);
        let c = Vec2::new(0.5, 1.7);
        let rule = triangle_rule(8).unwrap();
        let (pts, wts) = map_to_triangle(&rule, a, b, c);
        let center = (a + b + c) * (1.0 / 3.0);
        let frame = ModalFrame::build(3, center, 1.5, &pts, &wts);
        let n = frame.n;
        let mut gram = vec![0.0; n * n];
        for (p, w) in pts.iter().zip(&wts) {
            let vals = frame.eval(*p);
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] += w * vals[i] * vals[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[i * n + j] - expect).abs() < 1e-11,
                    "gram[{i}][{j}] = {}",
                    gram[i * n + j]
                );
            }
        }
    }

    #[test]
    fn modal_gradients_match_finite_differences() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        let c = Vec2::new(0.0, 1.0);
        let rule = triangle_rule(6).unwrap();
        let (pts, wts) = map_to_triangle(&rule, a, b, c);
        let frame = ModalFrame::build(2, Vec2::new(1.0 / 3.0, 1.0 / 3.0), 1.0, &pts, &wts);
        let p = Vec2::new(0.3, 0.25);
        let eps = 1e-6;
        let gx: Vec<f64> = {
            let hi = frame.eval(Vec2::new(p.x + eps, p.y));
            let lo = frame.eval(Vec2::new(p.x - eps, p.y));
            hi.iter().zip(&lo).map(|(h, l)| (h - l) / (2.0 * eps)).collect()
        };
        let grads = frame.eval_grad(p);
        for (g, fd) in grads.iter().zip(&gx) {
            assert!((g.x - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn edge_legendre_orthonormal() {
        let h = 0.37;
        let rule = crate::quadrature::segment_rule(9).unwrap();
        let mut gram = [[0.0f64; 4]; 4];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let vals = edge_legendre(3, h, p.x);
            for i in 0..4 {
                for j in 0..4 {
                    gram[i][j] += w * h * vals[i] * vals[j];
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - expect).abs() < 1e-12);
            }
        }
    }
}
