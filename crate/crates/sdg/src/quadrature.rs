//! Gauss quadrature rules on the reference segment `[0,1]` and the reference
//! triangle {(x,y) : x >= 0, y >= 0, x + y <= 1}.
//!
//! Triangle rules are conical-product Gauss rules obtained by collapsing a
//! tensor Gauss-Legendre grid; they have strictly positive weights and are
//! exact to the requested polynomial degree.

use crate::error::{Result, SdgError};
use crate::geometry::Vec2;

pub const MAX_DEGREE: usize = 20;

/// A quadrature rule on a reference domain.
#[derive(Debug, Clone)]
pub struct QuadRule {
    /// Points in reference coordinates. For segment rules only `x` is used.
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Gauss rule on the reference segment [0, 1] exact to the given degree.
pub fn segment_rule(degree: usize) -> Result<QuadRule> {
    if degree > MAX_DEGREE {
        return Err(SdgError::UnsupportedDegree(degree));
    }
    let n = degree / 2 + 1;
    let (xs, ws) = gauss_legendre(n);
    Ok(QuadRule {
        points: xs.iter().map(|&x| Vec2::new(0.5 * (x + 1.0), 0.0)).collect(),
        weights: ws.iter().map(|&w| 0.5 * w).collect(),
        degree,
    })
}

/// Gauss rule on the reference triangle exact to the given degree.
pub fn triangle_rule(degree: usize) -> Result<QuadRule> {
    if degree > MAX_DEGREE {
        return Err(SdgError::UnsupportedDegree(degree));
    }
    // Collapsed map (u, v) -> (u (1 - v), v) with Jacobian (1 - v).
    // A monomial x^a y^b with a + b <= degree becomes degree <= `degree` in u
    // and <= `degree` + 1 in v after the Jacobian.
    let nu = degree / 2 + 1;
    let nv = degree.div_ceil(2) + 1;
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (iv, &tv) in xv.iter().enumerate() {
        let v = 0.5 * (tv + 1.0);
        for (iu, &tu) in xu.iter().enumerate() {
            let u = 0.5 * (tu + 1.0);
            points.push(Vec2::new(u * (1.0 - v), v));
            weights.push(0.25 * wu[iu] * wv[iv] * (1.0 - v));
        }
    }
    Ok(QuadRule { points, weights, degree })
}

/// Affine image of a reference-triangle rule on the physical triangle with
/// vertices `a`, `b`, `c`. Weights are scaled by the Jacobian determinant.
pub fn map_to_triangle(rule: &QuadRule, a: Vec2, b: Vec2, c: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let jac = (b - a).cross(c - a); // = 2 |tri|
    let pts = rule
        .points
        .iter()
        .map(|p| a + (b - a) * p.x + (c - a) * p.y)
        .collect();
    let ws = rule.weights.iter().map(|w| w * jac).collect();
    (pts, ws)
}

/// Affine image of a reference-segment rule on the physical segment from `a`
/// to `b`. Weights are scaled by the segment length.
pub fn map_to_segment(rule: &QuadRule, a: Vec2, b: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let len = a.dist(b);
    let pts = rule.points.iter().map(|p| a + (b - a) * p.x).collect();
    let ws = rule.weights.iter().map(|w| w * len).collect();
    (pts, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral_triangle(a: u32, b: u32) -> f64 {
        // int_T x^a y^b = a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>().max(1.0);
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn triangle_rule_degree1_integrates_one() {
        let rule = triangle_rule(1).unwrap();
        assert!((rule.total_weight() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn triangle_rule_degree2_integrates_x() {
        let rule = triangle_rule(2).unwrap();
        let val: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p.x)
            .sum();
        assert!((val - 1.0 / 6.0).abs() < 1e-14, "got {val}");
    }

    #[test]
    fn segment_rule_degree3_integrates_cubic() {
        let rule = segment_rule(3).unwrap();
        let val: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p.x.powi(3))
            .sum();
        assert!((val - 0.25).abs() < 1e-14, "got {val}");
    }

    #[test]
    fn all_monomials_exact_up_to_stated_degree() {
        for degree in 1..=MAX_DEGREE {
            let rule = triangle_rule(degree).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!((rule.total_weight() - 0.5).abs() < 1e-13);
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let val: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p.x.powi(a as i32) * p.y.powi(b as i32))
                        .sum();
                    let exact = monomial_integral_triangle(a, b);
                    assert!(
                        (val - exact).abs() < 1e-13,
                        "deg {degree} x^{a} y^{b}: {val} vs {exact}"
                    );
                }
            }
            let seg = segment_rule(degree).unwrap();
            assert!(seg.weights.iter().all(|&w| w > 0.0));
            for a in 0..=degree as u32 {
                let val: f64 = seg
                    .points
                    .iter()
                    .zip(&seg.weights)
                    .map(|(p, w)| w * p.x.powi(a as i32))
                    .sum();
                let exact = 1.0 / (a as f64 + 1.0);
                assert!((val - exact).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn degree_over_maximum_rejected() {
        assert!(triangle_rule(MAX_DEGREE + 1).is_err());
        assert!(segment_rule(MAX_DEGREE + 1).is_err());
    }

    #[test]
    fn mapped_triangle_rule_scales_area() {
        let rule = triangle_rule(2).unwrap();
        let (_, ws) = map_to_triangle(
            &rule,
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 2.0),
        );
        let total: f64 = ws.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }
}
