//! Shows the three staggered spaces on one mesh: dof counts and their split
//! into edge and interior moments, the dual-basis conditioning, and the
//! continuity pattern each space carries.

use sdg::femspace::{FeSpace, SpaceKind};
use sdg::mesh::{
    build_staggered, generate_primal, BoundaryTag, MeshKind, PointRule, Rect, Side, Subdomain,
};
use std::sync::Arc;

fn main() -> sdg::Result<()> {
    let primal = generate_primal(
        &MeshKind::Rectangular,
        2,
        2,
        Rect::new(0.0, 0.0, 1.0, 1.0),
        0.0,
        0,
        Subdomain::Stokes,
        Some(Side::Top),
    )?;
    let mesh = Arc::new(build_staggered(primal, PointRule::Centroid)?);
    println!(
        "2x2 primal: {} cells, {} triangles, |F_u| = {}, |F_p| = {}, interior F_u = {}",
        mesh.primal.cells.len(),
        mesh.triangles.len(),
        mesh.fu_edges.len(),
        mesh.fp_edges.len(),
        mesh.fu_interior.len()
    );

    for k in 1..=3 {
        println!("degree k = {k}:");
        for (kind, constraint, note) in [
            (SpaceKind::U, vec![BoundaryTag::GammaS, BoundaryTag::Interface],
             "continuous across primal edges"),
            (SpaceKind::V, vec![], "normal-trace continuous across dual edges"),
            (SpaceKind::P, vec![], "cellwise polynomials"),
        ] {
            let space = FeSpace::build(mesh.clone(), kind, k, &constraint)?;
            println!(
                "  {:1}: {:4} dofs ({:4} free)  cond(dual basis) <= {:.2e}  -- {}",
                kind.as_str(),
                space.n_dofs(),
                space.n_free(),
                space.basis.cond_max.max(1.0),
                note
            );
        }
    }
    Ok(())
}
