//! The nonlinear Darcy momentum operator, its pointwise map, and the
//! linearized blocks used by the fixed-point and Newton iterations.

use super::PhysicalParams;
use crate::error::{Result, SdgError};
use crate::femspace::FeSpace;
use crate::fields::DiscreteField;
use crate::geometry::Vec2;
use crate::quadrature::{map_to_triangle, triangle_rule};
use crate::sparse::Coo;

/// The pointwise Forchheimer map `A(u) = (mu/rho) K^-1 u + (beta/rho) |u| u`.
pub fn apply_forchheimer(u: Vec2, params: &PhysicalParams, at: Vec2) -> Vec2 {
    let kinv = params.permeability.k_inv(at);
    kinv.apply(u) * (params.mu / params.rho) + u * (params.beta / params.rho * u.norm())
}

/// Assembles the frozen-coefficient Darcy momentum block
/// `M_A(v, w) = ((mu/rho) K^-1 v + (beta/rho) |u_prev| v, w)` with the
/// high-order rule that controls the non-polynomial weight.
pub fn assemble_picard_darcy(
    v_d: &FeSpace,
    u_prev: Option<&DiscreteField>,
    params: &PhysicalParams,
) -> Result<Coo> {
    assemble_darcy_momentum(v_d, u_prev, params, false).map(|(m, _)| m)
}

/// Newton linearization: `M(v, w) = ((mu/rho) K^-1 v + (beta/rho)(|u| v +
/// (u . v / |u|) u), w)` plus the right-hand-side correction vector
/// `(beta/rho)(|u| u, w)`.
pub fn assemble_newton_darcy(
    v_d: &FeSpace,
    u_prev: &DiscreteField,
    params: &PhysicalParams,
) -> Result<(Coo, Vec<f64>)> {
    assemble_darcy_momentum(v_d, Some(u_prev), params, true)
        .map(|(m, r)| (m, r.expect("newton correction")))
}

fn assemble_darcy_momentum(
    v_d: &FeSpace,
    u_prev: Option<&DiscreteField>,
    params: &PhysicalParams,
    newton: bool,
) -> Result<(Coo, Option<Vec<f64>>)> {
    let k = v_d.k;
    let n = v_d.n_free();
    let rule = triangle_rule(3 * k + 4)?;
    let mut m = Coo::new(n, n);
    let mut correction = if newton { Some(vec![0.0; n]) } else { None };
    let mu_rho = params.mu / params.rho;
    let beta_rho = params.beta / params.rho;
    let mesh = v_d.mesh.clone();

    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.tri_points(t);
        let (pts, wts) = map_to_triangle(&rule, a, b, c);
        let (vval, _) = v_d.eval_v(t, &pts);
        let vdofs = v_d.entity_dofs(t);
        let uq: Vec<Vec2> = match u_prev {
            Some(field) => field.eval_vector(t, &pts),
            None => vec![Vec2::default(); pts.len()],
        };
        let kinv: Vec<_> = pts.iter().map(|&p| {
            let ki = params.permeability.k_inv(p);
            if !ki.det().is_finite() || ki.det() == 0.0 {
                return Err(SdgError::SingularPermeability { x: p.x, y: p.y });
            }
            Ok(ki)
        }).collect::<Result<Vec<_>>>()?;

        for (i, &vi) in vdofs.iter().enumerate() {
            let fi = v_d.dofs.free_index[vi].unwrap();
            for (j, &vj) in vdofs.iter().enumerate() {
                let fj = v_d.dofs.free_index[vj].unwrap();
                let mut val = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    let wv = vval[j][q];
                    let tv = vval[i][q];
                    let mut au = kinv[q].apply(wv) * mu_rho;
                    let unorm = uq[q].norm();
                    au = au + wv * (beta_rho * unorm);
                    if newton && unorm > 0.0 {
                        au = au + uq[q] * (beta_rho * uq[q].dot(wv) / unorm);
                    }
                    val += w * au.dot(tv);
                }
                m.push(fi, fj, val);
            }
            if let Some(corr) = correction.as_deref_mut() {
                let mut val = 0.0;
                for (q, &w) in wts.iter().enumerate() {
                    val += w * beta_rho * uq[q].norm() * uq[q].dot(vval[i][q]);
                }
                corr[fi] += val;
            }
        }
    }
    Ok((m, correction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::PermeabilityField;
    use crate::femspace::SpaceKind;
    use crate::mesh::{
        build_staggered, generate_primal, MeshKind, PointRule, Rect, Side, Subdomain,
    };
    use std::sync::Arc;

    fn v_space() -> Arc<FeSpace> {
        let primal = generate_primal(
            &MeshKind::Rectangular,
            2,
            2,
            Rect::new(0.0, 1.0, 1.0, 2.0),
            0.0,
            0,
            Subdomain::Darcy,
            Some(Side::Bottom),
        )
        .unwrap();
        let mesh = Arc::new(build_staggered(primal, PointRule::Centroid).unwrap());
        Arc::new(FeSpace::build(mesh, SpaceKind::V, 1, &[]).unwrap())
    }

    #[test]
    fn apply_forchheimer_values() {
        let params = PhysicalParams::unit();
        let a = apply_forchheimer(Vec2::new(3.0, 4.0), &params, Vec2::default());
        assert!((a.x - 18.0).abs() < 1e-13 && (a.y - 24.0).abs() < 1e-13);
        let z = apply_forchheimer(Vec2::default(), &params, Vec2::default());
        assert!(z.norm() == 0.0);
        let mut p2 = PhysicalParams::unit();
        p2.beta = 0.0;
        p2.permeability = PermeabilityField::HighContrast {
            region: Rect::new(-1.0, -1.0, 1.0, 1.0),
            value: 2.0,
        };
        let s = apply_forchheimer(Vec2::new(1.0, 0.0), &p2, Vec2::default());
        assert!((s.x - 0.5).abs() < 1e-14 && s.y.abs() < 1e-15);
    }

    #[test]
    fn beta_zero_gives_mass_matrix() {
        let sp = v_space();
        let mut params = PhysicalParams::unit();
        params.beta = 0.0;
        let m = assemble_picard_darcy(&sp, None, &params).unwrap();
        // against the directly assembled V mass matrix
        let rule = triangle_rule(7).unwrap();
        let mut mass = Coo::new(sp.n_free(), sp.n_free());
        for t in 0..sp.mesh.triangles.len() {
            let [a, b, c] = sp.mesh.tri_points(t);
            let (pts, wts) = crate::quadrature::map_to_triangle(&rule, a, b, c);
            let (vval, _) = sp.eval_v(t, &pts);
            let vdofs = sp.entity_dofs(t);
            for (i, &vi) in vdofs.iter().enumerate() {
                for (j, &vj) in vdofs.iter().enumerate() {
                    let mut val = 0.0;
                    for (q, &w) in wts.iter().enumerate() {
                        val += w * vval[i][q].dot(vval[j][q]);
                    }
                    mass.push(
                        sp.dofs.free_index[vi].unwrap(),
                        sp.dofs.free_index[vj].unwrap(),
                        val,
                    );
                }
            }
        }
        let (dev, norm) = m.transpose_deviation(&mass);
        // M_A(beta = 0, K = I) is the mass matrix (mass is symmetric)
        assert!(dev < 1e-12 * norm, "deviation {dev:.3e} norm {norm:.3e}");
    }

    #[test]
    fn constant_u_prev_scales_mass() {
        let sp = v_space();
        let params = PhysicalParams::unit();
        // u_prev = (3, 4): coefficient 1 + |u| = 6 so M_A = 6 x mass
        let field = crate::fields::DiscreteField::interpolate_jh(&sp, 1, |_, _| Vec2::new(3.0, 4.0))
            .unwrap();
        let m = assemble_picard_darcy(&sp, Some(&field), &params).unwrap();
        let mut params0 = params.clone();
        params0.beta = 0.0;
        let mass = assemble_picard_darcy(&sp, None, &params0).unwrap();
        let mut scaled = mass.clone();
        for t in &mut scaled.triplets {
            t.val *= 6.0;
        }
        let (dev, norm) = m.transpose_deviation(&scaled);
        assert!(dev < 1e-11 * norm, "deviation {dev:.3e}");
    }

    #[test]
    fn picard_block_positive_definite() {
        let sp = v_space();
        let params = PhysicalParams::unit();
        let field =
            crate::fields::DiscreteField::interpolate_jh(&sp, 1, |p, _| Vec2::new(p.x, -p.y)).unwrap();
        let m = assemble_picard_darcy(&sp, Some(&field), &params).unwrap();
        let dense = m.to_dense();
        let eigs = crate::sparse::sym_eigenvalues(&dense).unwrap();
        assert!(eigs[0] > 0.0, "smallest eigenvalue {:.3e}", eigs[0]);
    }
}
