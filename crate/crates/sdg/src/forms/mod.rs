//! Assembly of the coupled system: every bilinear form, the interface
//! coupling blocks, the linearized Forchheimer block and right-hand sides.
//!
//! Unknown layout: `[sigma_S | u_S | p_S | u_D | p_D]`. No-flux parts of the
//! Darcy outer boundary need no extra unknowns: the free pressure moments on
//! those edges act as the natural multipliers through the boundary pairing in
//! the adjoint mixed form, mirroring how the interface conditions enter.

mod assemble;
mod picard;
mod rhs;

pub use assemble::assemble_linear_blocks;
pub use picard::{apply_forchheimer, assemble_newton_darcy, assemble_picard_darcy};
pub use rhs::{assemble_rhs, RhsBundle};

use crate::cases::PermeabilityField;
use crate::error::{Result, SdgError};
use crate::femspace::{FeSpace, SpaceKind};
use crate::geometry::Vec2;
use crate::mesh::{BoundaryTag, StaggeredMesh, Subdomain};
use crate::sparse::Coo;
use std::sync::Arc;

/// Physical parameters of the coupled model.
#[derive(Debug, Clone)]
pub struct PhysicalParams {
    /// Fluid viscosity in the porous region.
    pub mu: f64,
    /// Fluid density.
    pub rho: f64,
    /// Forchheimer coefficient (>= 0; 0 recovers linear Darcy flow).
    pub beta: f64,
    /// Stokes viscosity.
    pub nu: f64,
    /// Slip coefficient of the interface friction condition.
    pub g_bjs: f64,
    pub permeability: PermeabilityField,
}

impl PhysicalParams {
    pub fn unit() -> Self {
        PhysicalParams {
            mu: 1.0,
            rho: 1.0,
            beta: 1.0,
            nu: 1.0,
            g_bjs: 1.0,
            permeability: PermeabilityField::Identity,
        }
    }

    /// Positivity of the scalar parameters and SPD spot checks of K.
    pub fn validate(&self, sample: &[Vec2]) -> Result<()> {
        if !(self.mu > 0.0 && self.rho > 0.0 && self.nu > 0.0) {
            return Err(SdgError::Config("mu, rho, nu must be positive".into()));
        }
        if self.beta < 0.0 || self.g_bjs < 0.0 {
            return Err(SdgError::Config("beta and G must be nonnegative".into()));
        }
        for &p in sample {
            let k = self.permeability.k(p);
            if !k.is_symmetric(1e-12) {
                return Err(SdgError::Config(format!(
                    "permeability not symmetric at ({}, {})",
                    p.x, p.y
                )));
            }
            let (lo, _) = k.sym_eigenvalues();
            if !(lo > 0.0) {
                return Err(SdgError::SingularPermeability { x: p.x, y: p.y });
            }
        }
        Ok(())
    }
}

/// Block offsets of the coupled unknown vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    /// Free dofs per component of the Stokes V space.
    pub nf_vs: usize,
    /// Free dofs per component of the Stokes U space.
    pub nf_us: usize,
    pub n_sigma: usize,
    pub n_us: usize,
    pub n_ps: usize,
    pub n_ud: usize,
    pub n_pd: usize,
}

impl Layout {
    pub fn o_sigma(&self) -> usize {
        0
    }
    pub fn o_us(&self) -> usize {
        self.n_sigma
    }
    pub fn o_ps(&self) -> usize {
        self.n_sigma + self.n_us
    }
    pub fn o_ud(&self) -> usize {
        self.n_sigma + self.n_us + self.n_ps
    }
    pub fn o_pd(&self) -> usize {
        self.n_sigma + self.n_us + self.n_ps + self.n_ud
    }
    pub fn total(&self) -> usize {
        self.o_pd() + self.n_pd
    }
}

/// The finite element spaces of one coupled problem, plus the boundary
/// partition of the Darcy outer boundary.
#[derive(Debug, Clone)]
pub struct CoupledSpaces {
    pub k: usize,
    pub v_s: FeSpace,
    pub u_s: FeSpace,
    pub p_s: FeSpace,
    pub v_d: FeSpace,
    pub u_d: FeSpace,
    /// Darcy outer-boundary Fu edges carrying a no-flux condition (u . n = 0),
    /// enforced weakly by the free pressure trace through the boundary
    /// pairing of the adjoint mixed form.
    pub noflux_edges: Vec<usize>,
    pub layout: Layout,
}

impl CoupledSpaces {
    /// Builds all five spaces. `darcy_dirichlet` selects, by edge midpoint,
    /// which Darcy outer-boundary edges carry a pressure Dirichlet condition;
    /// the rest become no-flux edges.
    pub fn build(
        mesh_s: Arc<StaggeredMesh>,
        mesh_d: Arc<StaggeredMesh>,
        k: usize,
        darcy_dirichlet: &dyn Fn(Vec2) -> bool,
    ) -> Result<CoupledSpaces> {
        if mesh_s.subdomain() != Subdomain::Stokes || mesh_d.subdomain() != Subdomain::Darcy {
            return Err(SdgError::InvalidMesh(
                "coupled spaces expect (Stokes, Darcy) meshes".into(),
            ));
        }
        let v_s = FeSpace::build(mesh_s.clone(), SpaceKind::V, k, &[])?;
        let u_s = FeSpace::build(mesh_s.clone(), SpaceKind::U, k, &[BoundaryTag::GammaS])?;
        let p_s = FeSpace::build(mesh_s.clone(), SpaceKind::P, k, &[])?;
        let v_d = FeSpace::build(mesh_d.clone(), SpaceKind::V, k, &[])?;
        let u_d = FeSpace::build_with(mesh_d.clone(), SpaceKind::U, k, &|edge| {
            if edge.boundary_tag != Some(BoundaryTag::GammaD) {
                return false;
            }
            let (a, b) = (mesh_d.points[edge.vertices[0]], mesh_d.points[edge.vertices[1]]);
            darcy_dirichlet((a + b) * 0.5)
        })?;
        let mut noflux_edges = Vec::new();
        for &e in &mesh_d.fu_edges {
            let edge = &mesh_d.edges[e];
            if edge.boundary_tag == Some(BoundaryTag::GammaD) {
                let (a, b) = edge.endpoints(&mesh_d);
                if !darcy_dirichlet((a + b) * 0.5) {
                    noflux_edges.push(e);
                }
            }
        }
        let layout = Layout {
            nf_vs: v_s.n_free(),
            nf_us: u_s.n_free(),
            n_sigma: 2 * v_s.n_free(),
            n_us: 2 * u_s.n_free(),
            n_ps: p_s.n_dofs(),
            n_ud: v_d.n_free(),
            n_pd: u_d.n_free(),
        };
        Ok(CoupledSpaces {
            k,
            v_s,
            u_s,
            p_s,
            v_d,
            u_d,
            noflux_edges,
            layout,
        })
    }

    /// All-Dirichlet Darcy boundary (the standard manufactured setting).
    pub fn build_all_dirichlet(
        mesh_s: Arc<StaggeredMesh>,
        mesh_d: Arc<StaggeredMesh>,
        k: usize,
    ) -> Result<CoupledSpaces> {
        Self::build(mesh_s, mesh_d, k, &|_| true)
    }
}

/// The assembled linear blocks of the coupled system over free dofs, together
/// with the lift blocks (free test rows by constrained trial columns) needed
/// to move inhomogeneous Dirichlet data to the right-hand side.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub layout: Layout,
    /// nu^-1 mass on sigma.
    pub sigma_mass: Coo,
    pub a_s: Coo,
    pub a_s_star: Coo,
    pub b_s: Coo,
    pub b_s_star: Coo,
    pub a_d: Coo,
    pub a_d_star: Coo,
    /// +<p_D, v_S . n_S> on the interface.
    pub c_pd_vs: Coo,
    /// -<u_S . n_S, q_D> on the interface (sign included).
    pub c_us_qd: Coo,
    /// G <u_S . t, v_S . t> on the interface.
    pub c_bjs: Coo,
    // lift blocks
    pub lift_a_s_star: Coo,
    pub lift_b_s: Coo,
    pub lift_c_bjs: Coo,
    pub lift_c_us_qd: Coo,
    pub lift_c_pd_vs: Coo,
    pub lift_a_d_star: Coo,
}

impl BlockSystem {
    /// Worst relative Frobenius deviation of the three adjoint identities.
    pub fn max_transpose_deviation(&self) -> f64 {
        let rel = |(dev, norm): (f64, f64)| if norm > 0.0 { dev / norm } else { dev };
        let d1 = rel(self.a_s.transpose_deviation(&self.a_s_star));
        let d2 = rel(self.a_d.transpose_deviation(&self.a_d_star));
        let d3 = rel(self.b_s.transpose_deviation(&self.b_s_star));
        d1.max(d2).max(d3)
    }

    /// Relative deviation of the interface skew pairing
    /// `C_uS_qD = -(C_pD_vS)^T`.
    pub fn interface_skew_deviation(&self) -> f64 {
        let mut neg = self.c_pd_vs.clone();
        for t in &mut neg.triplets {
            t.val = -t.val;
        }
        let (dev, norm) = self.c_us_qd.transpose_deviation(&neg);
        if norm > 0.0 {
            dev / norm
        } else {
            dev
        }
    }

    /// Structural checks: adjoint identities, interface skewness, BJS
    /// positive semidefiniteness, and (when the Darcy block is supplied)
    /// absence of empty equation rows.
    pub fn validate(&self, m_a: Option<&Coo>) -> Result<()> {
        let dev = self.max_transpose_deviation();
        if dev > 1e-12 {
            return Err(SdgError::AssemblyIntegrity(format!(
                "adjoint transpose deviation {dev:.3e}"
            )));
        }
        let skew = self.interface_skew_deviation();
        if skew > 1e-12 {
            return Err(SdgError::AssemblyIntegrity(format!(
                "interface skew deviation {skew:.3e}"
            )));
        }
        // BJS: symmetric and PSD on its (small) support
        let (bdev, bnorm) = self.c_bjs.transpose_deviation(&self.c_bjs);
        if bnorm > 0.0 && bdev > 1e-12 * bnorm {
            return Err(SdgError::AssemblyIntegrity(format!(
                "BJS block asymmetric ({:.3e})",
                bdev / bnorm
            )));
        }
        if bnorm > 0.0 {
            let support: std::collections::BTreeSet<usize> = self
                .c_bjs
                .triplets
                .iter()
                .flat_map(|t| [t.row, t.col])
                .collect();
            let idx: Vec<usize> = support.into_iter().collect();
            let pos: std::collections::HashMap<usize, usize> =
                idx.iter().enumerate().map(|(i, &d)| (d, i)).collect();
            let mut dense = faer::Mat::<f64>::zeros(idx.len(), idx.len());
            for t in &self.c_bjs.triplets {
                dense[(pos[&t.row], pos[&t.col])] += t.val;
            }
            let eigs = crate::sparse::sym_eigenvalues(&dense)?;
            if let Some(&lo) = eigs.first() {
                if lo < -1e-12 * bnorm {
                    return Err(SdgError::AssemblyIntegrity(format!(
                        "BJS block indefinite (min eig {lo:.3e})"
                    )));
                }
            }
        }
        self.check_row_coverage(m_a)?;
        Ok(())
    }

    fn check_row_coverage(&self, m_a: Option<&Coo>) -> Result<()> {
        let l = &self.layout;
        let mark = |cov: &mut [bool], coo: &Coo| {
            for t in &coo.triplets {
                cov[t.row] = true;
            }
        };
        let require = |name: &str, n: usize, blocks: &[&Coo]| -> Result<()> {
            let mut cov = vec![false; n];
            for b in blocks {
                mark(&mut cov, b);
            }
            if let Some(row) = cov.iter().position(|&c| !c) {
                return Err(SdgError::AssemblyIntegrity(format!(
                    "empty equation row {row} in {name} block"
                )));
            }
            Ok(())
        };
        require("sigma", l.n_sigma, &[&self.sigma_mass])?;
        require(
            "u_S",
            l.n_us,
            &[&self.a_s, &self.b_s_star, &self.c_bjs, &self.c_pd_vs],
        )?;
        require("p_S", l.n_ps, &[&self.b_s])?;
        require("p_D", l.n_pd, &[&self.a_d, &self.c_us_qd])?;
        if let Some(ma) = m_a {
            require("u_D", l.n_ud, &[ma, &self.a_d_star])?;
        }
        Ok(())
    }

    /// Assembles the full coupled matrix for a given Darcy momentum block.
    pub fn coupled_matrix(&self, m_a: &Coo) -> Coo {
        let l = &self.layout;
        let n = l.total();
        let mut g = Coo::new(n, n);
        let mut place = |coo: &Coo, ro: usize, co: usize, sign: f64| {
            for t in &coo.triplets {
                g.push(ro + t.row, co + t.col, sign * t.val);
            }
        };
        place(&self.a_s, l.o_us(), l.o_sigma(), 1.0);
        place(&self.c_bjs, l.o_us(), l.o_us(), 1.0);
        place(&self.b_s_star, l.o_us(), l.o_ps(), 1.0);
        place(&self.c_pd_vs, l.o_us(), l.o_pd(), 1.0);
        place(&self.a_d, l.o_pd(), l.o_ud(), 1.0);
        place(&self.c_us_qd, l.o_pd(), l.o_us(), 1.0);
        place(&self.sigma_mass, l.o_sigma(), l.o_sigma(), 1.0);
        place(&self.a_s_star, l.o_sigma(), l.o_us(), -1.0);
        place(m_a, l.o_ud(), l.o_ud(), 1.0);
        place(&self.a_d_star, l.o_ud(), l.o_pd(), -1.0);
        place(&self.b_s, l.o_ps(), l.o_us(), 1.0);
        g
    }

    /// Writes each named block as coordinate-format text `i j value` into the
    /// given directory, one file per block.
    pub fn dump_blocks(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let blocks: [(&str, &Coo); 10] = [
            ("sigma_mass", &self.sigma_mass),
            ("a_s", &self.a_s),
            ("a_s_star", &self.a_s_star),
            ("b_s", &self.b_s),
            ("b_s_star", &self.b_s_star),
            ("a_d", &self.a_d),
            ("a_d_star", &self.a_d_star),
            ("c_pd_vs", &self.c_pd_vs),
            ("c_us_qd", &self.c_us_qd),
            ("c_bjs", &self.c_bjs),
        ];
        for (name, coo) in blocks {
            let mut text = String::new();
            for t in &coo.triplets {
                text.push_str(&format!("{} {} {}\n", t.row, t.col, t.val));
            }
            std::fs::write(dir.join(format!("{name}.coo")), text)?;
        }
        Ok(())
    }
}
