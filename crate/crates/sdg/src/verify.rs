//! Numerical verification: algebraic identities of the assembled system,
//! monotonicity and continuity of the nonlinear momentum map, discrete
//! inf-sup constants, projection orthogonality, and convergence-rate fits.

use crate::error::{Result, SdgError};
use crate::femspace::modal::dim_pk;
use crate::femspace::{FeSpace, SpaceKind};
use crate::fields::DiscreteField;
use crate::forms::{apply_forchheimer, BlockSystem, CoupledSpaces, PhysicalParams};
use crate::geometry::Vec2;
use crate::quadrature::{map_to_segment, map_to_triangle, segment_rule, triangle_rule};
use crate::sparse::Coo;
use faer::linalg::solvers::Solve;
use faer::Mat;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Least-squares fit of log(error) against log(h).
#[derive(Debug, Clone)]
pub struct RateFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    /// Per-step observed orders log(e_i/e_{i+1}) / log(h_i/h_{i+1}).
    pub step_orders: Vec<f64>,
    pub excluded_nonpositive: usize,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let mut usable: Vec<(f64, f64)> = Vec::new();
    let mut excluded = 0;
    for &(h, e) in points {
        if e > 0.0 && h > 0.0 {
            usable.push((h, e));
        } else {
            excluded += 1;
        }
    }
    for w in usable.windows(2) {
        if w[1].0 >= w[0].0 {
            return Err(SdgError::Config("h must be strictly decreasing".into()));
        }
    }
    if usable.len() < 3 {
        return Err(SdgError::TooFewLevels(usable.len()));
    }
    let n = usable.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, e) in &usable {
        let x = h.ln();
        let y = e.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let step_orders = usable
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect();
    Ok(RateFit { points: usable, slope, step_orders, excluded_nonpositive: excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfSupForm {
    /// Pressure-velocity coupling b_S over ||v||_h ||q||_L2.
    BS,
    /// Stress-velocity coupling a_S over ||tau||_XS' ||v||_h.
    AS,
}

#[derive(Debug, Clone)]
pub struct InfSupEstimate {
    pub form: InfSupForm,
    pub n_inf: usize,
    pub n_sup: usize,
    pub constant: f64,
}

/// Smallest generalized singular value of the form matrix in its norm pair,
/// via dense factorizations; intended for desk-scale meshes.
pub fn estimate_infsup(
    form: InfSupForm,
    spaces: &CoupledSpaces,
    system: &BlockSystem,
) -> Result<InfSupEstimate> {
    let (b, gram_sup, gram_inf, n_sup, n_inf) = match form {
        InfSupForm::BS => {
            let b = system.b_s.to_dense();
            let gv = gram_h_broken(spaces)?.to_dense();
            // the pressure frame is orthonormal cell by cell
            let gq = Mat::<f64>::identity(spaces.layout.n_ps, spaces.layout.n_ps);
            (b, gv, gq, spaces.layout.n_us, spaces.layout.n_ps)
        }
        InfSupForm::AS => {
            let a = system.a_s.to_dense();
            let gt = gram_xs_prime(spaces)?.to_dense();
            let gv = gram_h_broken(spaces)?.to_dense();
            (a, gt, gv, spaces.layout.n_sigma, spaces.layout.n_us)
        }
    };
    if n_sup > 4000 || n_inf > 4000 {
        return Err(SdgError::Config(format!(
            "inf-sup estimation is dense-only; {n_sup} x {n_inf} exceeds the desk-scale limit"
        )));
    }
    // S = B G_sup^-1 B^T against G_inf
    faer::set_global_parallelism(faer::Par::Seq);
    let llt = gram_sup
        .llt(faer::Side::Lower)
        .map_err(|_| SdgError::AssemblyIntegrity("sup-space Gram matrix not SPD".into()))?;
    let w = llt.solve(&b.transpose().to_owned());
    let s = &b * &w;
    let lam = crate::sparse::smallest_generalized_eigenvalue(&s, &gram_inf)?;
    if lam < 0.0 && lam > -1e-12 {
        return Ok(InfSupEstimate { form, n_inf, n_sup, constant: 0.0 });
    }
    Ok(InfSupEstimate { form, n_inf, n_sup, constant: lam.max(0.0).sqrt() })
}

/// Gram matrix of the broken H1 norm on the free dofs of [U_hS]^2.
fn gram_h_broken(spaces: &CoupledSpaces) -> Result<Coo> {
    let u_s = &spaces.u_s;
    let mesh = u_s.mesh.clone();
    let k = spaces.k;
    let nf = spaces.layout.nf_us;
    let tri = triangle_rule(2 * k + 4)?;
    let seg = segment_rule(2 * k + 3)?;
    let mut g = Coo::new(2 * nf, 2 * nf);
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.tri_points(t);
        let (pts, wts) = map_to_triangle(&tri, a, b, c);
        let (_, grads) = u_s.eval_u(t, &pts);
        let dofs = u_s.entity_dofs(t);
        for (i, &di) in dofs.iter().enumerate() {
            let Some(fi) = u_s.dofs.free_index[di] else { continue };
            for (j, &dj) in dofs.iter().enumerate() {
                let Some(fj) = u_s.dofs.free_index[dj] else { continue };
                let mut val = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    val += w * grads[i][q].dot(grads[j][q]);
                }
                for comp in 0..2 {
                    g.push(comp * nf + fi, comp * nf + fj, val);
                }
            }
        }
    }
    for &e in &mesh.fp_edges {
        let edge = &mesh.edges[e];
        let (tp, tm) = mesh.d_of_edge(e);
        let (lo, hi) = edge.endpoints(&mesh);
        let (pts, wts) = map_to_segment(&seg, lo, hi);
        let sides = [(tp, 1.0), (tm.unwrap(), -1.0)];
        let tables: Vec<_> = sides.iter().map(|&(t, _)| u_s.eval_u(t, &pts).0).collect();
        let inv_h = 1.0 / edge.length;
        for (si, &(ti, sgn_i)) in sides.iter().enumerate() {
            let dofs_i = u_s.entity_dofs(ti);
            for (i, &di) in dofs_i.iter().enumerate() {
                let Some(fi) = u_s.dofs.free_index[di] else { continue };
                for (sj, &(tj, sgn_j)) in sides.iter().enumerate() {
                    let dofs_j = u_s.entity_dofs(tj);
                    for (j, &dj) in dofs_j.iter().enumerate() {
                        let Some(fj) = u_s.dofs.free_index[dj] else { continue };
                        let mut val = 0.0;
                        for (q, &w) in wts.iter().enumerate() {
                            val += w * inv_h * sgn_i * sgn_j * tables[si][i][q] * tables[sj][j][q];
                        }
                        for comp in 0..2 {
                            g.push(comp * nf + fi, comp * nf + fj, val);
                        }
                    }
                }
            }
        }
    }
    Ok(g)
}

/// Gram matrix of the X_S' norm on [V_hS]^2.
fn gram_xs_prime(spaces: &CoupledSpaces) -> Result<Coo> {
    let v_s = &spaces.v_s;
    let mesh = v_s.mesh.clone();
    let k = spaces.k;
    let nf = spaces.layout.nf_vs;
    let tri = triangle_rule(2 * k + 4)?;
    let seg = segment_rule(2 * k + 3)?;
    let mut g = Coo::new(2 * nf, 2 * nf);
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.tri_points(t);
        let (pts, wts) = map_to_triangle(&tri, a, b, c);
        let (vals, _) = v_s.eval_v(t, &pts);
        let dofs = v_s.entity_dofs(t);
        for (i, &di) in dofs.iter().enumerate() {
            let fi = v_s.dofs.free_index[di].unwrap();
            for (j, &dj) in dofs.iter().enumerate() {
                let fj = v_s.dofs.free_index[dj].unwrap();
                let mut val = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    val += w * vals[i][q].dot(vals[j][q]);
                }
                for comp in 0..2 {
                    g.push(comp * nf + fi, comp * nf + fj, val);
                }
            }
        }
    }
    for &e in &mesh.fp_edges {
        let edge = &mesh.edges[e];
        let (lo, hi) = edge.endpoints(&mesh);
        let (pts, wts) = map_to_segment(&seg, lo, hi);
        // normal trace is single-valued: plus side suffices, but it couples
        // the shared edge dofs of both triangles identically; use the edge
        // moment expansion directly
        let side = edge.tri_plus;
        let (vals, _) = v_s.eval_v(side, &pts);
        let dofs = v_s.entity_dofs(side);
        for (i, &di) in dofs.iter().enumerate() {
            let fi = v_s.dofs.free_index[di].unwrap();
            for (j, &dj) in dofs.iter().enumerate() {
                let fj = v_s.dofs.free_index[dj].unwrap();
                let mut val = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    val += w
                        * edge.length
                        * vals[i][q].dot(edge.normal)
                        * vals[j][q].dot(edge.normal);
                }
                for comp in 0..2 {
                    g.push(comp * nf + fi, comp * nf + fj, val);
                }
            }
        }
    }
    Ok(g)
}

/// Worst relative transpose deviation of the three adjoint identities.
pub fn check_adjoints(system: &BlockSystem) -> f64 {
    system.max_transpose_deviation()
}

/// Minimum normalized monotonicity margin of the momentum map over random
/// pairs: the margin must be at least 1 up to rounding.
pub fn check_monotonicity(params: &PhysicalParams, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda_min = params
        .permeability
        .lambda_min_sampled(crate::mesh::Rect::new(0.0, 0.0, 1.0, 1.0), 32);
    let scale = params.mu / params.rho * lambda_min;
    let mut min_margin = f64::INFINITY;
    for _ in 0..samples {
        let u = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let v = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let at = Vec2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let d = u - v;
        let d2 = d.dot(d);
        if d2 == 0.0 {
            continue; // zero denominator: pair skipped
        }
        let lhs = (apply_forchheimer(u, params, at) - apply_forchheimer(v, params, at)).dot(d);
        min_margin = min_margin.min(lhs / (scale * d2));
    }
    min_margin
}

/// Maximum ratio of |A(v) - A(w)| to its continuity bound over random pairs;
/// must not exceed 1 up to rounding.
pub fn check_continuity(params: &PhysicalParams, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    for _ in 0..samples {
        let v = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let w = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let at = Vec2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let d = v - w;
        if d.norm() == 0.0 {
            continue;
        }
        let lhs = (apply_forchheimer(v, params, at) - apply_forchheimer(w, params, at)).norm();
        let kn = params.permeability.k_inv(at).sym_spectral_norm();
        let bound = params.mu / params.rho * kn * d.norm()
            + params.beta / params.rho * d.norm() * (v.norm() + w.norm());
        max_ratio = max_ratio.max(lhs / bound);
    }
    max_ratio
}

/// Max |a(u - J_h u, q)| over random unit test fields: the projection
/// orthogonality of the flux interpolant. Works for the Darcy pair
/// (V_D against U_D) and row-wise for the Stokes pair (V_S against U_S).
pub fn check_jh_orthogonality(
    v_space: &std::sync::Arc<FeSpace>,
    u_space: &std::sync::Arc<FeSpace>,
    f: &dyn Fn(Vec2) -> Vec2,
    n_random: usize,
    seed: u64,
) -> Result<f64> {
    assert_eq!(v_space.kind, SpaceKind::V);
    assert_eq!(u_space.kind, SpaceKind::U);
    let k = v_space.k;
    let mesh = v_space.mesh.clone();
    // the interpolation rules must be reused here so the defining moments
    // vanish to rounding
    let tri = triangle_rule(2 * k + 4)?;
    let seg = segment_rule(2 * k + 4)?;
    let jh = DiscreteField::interpolate_jh(v_space, 1, |p, _| f(p))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_random {
        let coeffs: Vec<f64> = (0..u_space.n_dofs())
            .map(|d| {
                if u_space.dofs.constrained[d] {
                    0.0
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        let q = DiscreteField {
            space: u_space.clone(),
            components: 1,
            coeffs,
        };
        // volume part: -(w, grad q)
        let mut acc = 0.0;
        for t in 0..mesh.triangles.len() {
            let [a, b, c] = mesh.tri_points(t);
            let (pts, wts) = map_to_triangle(&tri, a, b, c);
            let wvals = jh.eval_vector(t, &pts);
            let qg = q.eval_grad_comp(t, &pts, 0);
            for (i, &w) in wts.iter().enumerate() {
                let err = f(pts[i]) - wvals[i];
                acc -= w * err.dot(qg[i]);
            }
        }
        // edge part: + <w . n, [q]> over dual edges
        for &e in &mesh.fp_edges {
            let edge = &mesh.edges[e];
            let (tp, tm) = mesh.d_of_edge(e);
            let (lo, hi) = edge.endpoints(&mesh);
            let (pts, wts) = map_to_segment(&seg, lo, hi);
            let wvals = jh.eval_vector(tp, &pts);
            let qp = q.eval_scalar_comp(tp, &pts, 0);
            let qm = q.eval_scalar_comp(tm.unwrap(), &pts, 0);
            for (i, &w) in wts.iter().enumerate() {
                let err_n = (f(pts[i]) - wvals[i]).dot(edge.normal);
                acc += w * err_n * (qp[i] - qm[i]);
            }
        }
        let qnorm = crate::sparse::norm2(&q.coeffs).max(1e-300);
        worst = worst.max(acc.abs() / qnorm);
    }
    Ok(worst)
}

/// Deviation of the defining moments of the scalar interpolant I_h on a
/// smooth field (max over all edge and interior moments).
pub fn check_ih_moments(
    u_space: &std::sync::Arc<FeSpace>,
    f: &dyn Fn(Vec2) -> f64,
) -> Result<f64> {
    let k = u_space.k;
    let mesh = u_space.mesh.clone();
    let seg = segment_rule(2 * k + 4)?;
    let tri = triangle_rule(2 * k + 4)?;
    let ih = DiscreteField::interpolate_ih(u_space, 1, |p, _| f(p))?;
    let mut worst = 0.0f64;
    for &e in &mesh.fu_edges {
        let edge = &mesh.edges[e];
        let side = edge.tri_plus;
        let (lo, hi) = edge.endpoints(&mesh);
        let (pts, wts) = map_to_segment(&seg, lo, hi);
        let vals = ih.eval_scalar_comp(side, &pts, 0);
        for m in 0..=k {
            let mut acc = 0.0;
            for (q, &w) in wts.iter().enumerate() {
                let leg =
                    crate::femspace::modal::edge_legendre(k, edge.length, seg.points[q].x);
                acc += w * leg[m] * (f(pts[q]) - vals[q]);
            }
            worst = worst.max(acc.abs());
        }
    }
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.tri_points(t);
        let (pts, wts) = map_to_triangle(&tri, a, b, c);
        let vals = ih.eval_scalar_comp(t, &pts, 0);
        let frame = &u_space.basis.frames[t];
        for m in 0..dim_pk(k - 1) {
            let mut acc = 0.0;
            for (q, &w) in wts.iter().enumerate() {
                let modal = frame.eval(pts[q]);
                acc += w * modal[m] * (f(pts[q]) - vals[q]);
            }
            worst = worst.max(acc.abs());
        }
    }
    Ok(worst)
}

/// Fault injections for the negative controls of the verification suite.
pub fn inject_entry_fault(system: &BlockSystem, magnitude: f64) -> BlockSystem {
    let mut faulty = system.clone();
    if let Some(t) = faulty.a_s.triplets.first_mut() {
        t.val += magnitude;
    }
    faulty
}

pub fn inject_orientation_fault(system: &BlockSystem) -> BlockSystem {
    let mut faulty = system.clone();
    // wrong interface orientation: the skew pairing loses its sign
    for t in &mut faulty.c_us_qd.triplets {
        t.val = -t.val;
    }
    faulty
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric_sequence_has_slope_two() {
        let fit = fit_rate(&[(0.25, 1e-2), (0.125, 2.5e-3), (0.0625, 6.25e-4)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12, "slope {}", fit.slope);
        for r in &fit.step_orders {
            assert!((r - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_errors_have_slope_zero() {
        let fit = fit_rate(&[(0.5, 3.0), (0.25, 3.0), (0.125, 3.0)]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn nonpositive_errors_excluded() {
        let err = fit_rate(&[(0.5, 1.0), (0.25, 0.0), (0.125, 1e-3)]);
        assert!(matches!(err, Err(SdgError::TooFewLevels(2))));
        let ok = fit_rate(&[(0.5, 1.0), (0.25, 0.5), (0.125, 0.25), (0.0625, 0.0)]).unwrap();
        assert_eq!(ok.excluded_nonpositive, 1);
        assert_eq!(ok.points.len(), 3);
    }

    #[test]
    fn monotonicity_margin_examples() {
        let params = PhysicalParams::unit();
        // u = (1,0), v = 0: (A(u) - A(0)) . u = (1 + 1) = 2, denominator 1
        let mut rng_free_margin = f64::INFINITY;
        let u = Vec2::new(1.0, 0.0);
        let v = Vec2::new(0.0, 0.0);
        let lhs = (apply_forchheimer(u, &params, v) - apply_forchheimer(v, &params, v)).dot(u - v);
        rng_free_margin = rng_free_margin.min(lhs);
        assert!((rng_free_margin - 2.0).abs() < 1e-14);

        let margin = check_monotonicity(&params, 1000, 11);
        assert!(margin >= 1.0 - 1e-12, "margin {margin}");

        let mut linear = params.clone();
        linear.beta = 0.0;
        let margin0 = check_monotonicity(&linear, 1000, 12);
        assert!((margin0 - 1.0).abs() < 1e-12, "beta=0 margin {margin0}");
    }

    #[test]
    fn continuity_bound_holds() {
        let params = PhysicalParams::unit();
        let ratio = check_continuity(&params, 1000, 5);
        assert!(ratio <= 1.0 + 1e-12, "ratio {ratio}");
        assert!(ratio > 0.5, "bound should be reasonably tight, got {ratio}");
    }

    #[test]
    fn negative_control_monotonicity() {
        // unphysical beta < 0 violates the margin and must be flagged
        let mut params = PhysicalParams::unit();
        params.beta = -1.0;
        let margin = check_monotonicity(&params, 1000, 3);
        assert!(margin < 1.0 - 1e-6, "fault not detected: margin {margin}");
    }
}
