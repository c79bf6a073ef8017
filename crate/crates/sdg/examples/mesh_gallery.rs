//! Builds every mesh kind, subdivides each into its staggered triangulation,
//! reports the regularity measures, and writes the meshes to poly2d files.

use sdg::mesh::{
    build_staggered, check_regularity, generate_primal, write_poly2d, MeshKind, PointRule, Rect,
    Side, Subdomain,
};

fn main() -> sdg::Result<()> {
    let out = std::env::temp_dir().join("sdg_mesh_gallery");
    std::fs::create_dir_all(&out)?;
    let domain = Rect::new(0.0, 0.0, 1.0, 1.0);

    for (name, kind, distortion) in [
        ("rectangular", MeshKind::Rectangular, 0.0),
        ("triangular", MeshKind::Triangular, 0.0),
        ("distorted", MeshKind::Distorted, 0.3),
    ] {
        let primal = generate_primal(
            &kind,
            8,
            8,
            domain,
            distortion,
            7,
            Subdomain::Stokes,
            Some(Side::Top),
        )?;
        let path = out.join(format!("{name}.poly2d"));
        write_poly2d(&primal, &path)?;
        let staggered = build_staggered(primal, PointRule::Centroid)?;
        let report = check_regularity(&staggered, 0.1);
        println!(
            "{name:12} cells {:4}  triangles {:4}  |F_u| {:4}  |F_p| {:4}  h {:.4}  \
             min h_e/h_E {:.3}  min ball ratio {:.3}  pass {}",
            staggered.primal.cells.len(),
            staggered.triangles.len(),
            staggered.fu_edges.len(),
            staggered.fp_edges.len(),
            staggered.h,
            report.min_edge_ratio,
            report.min_ball_ratio,
            report.pass
        );
        println!("             written to {}", path.display());
    }
    Ok(())
}
