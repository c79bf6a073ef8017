//! Study driver: builds the coupled problem per refinement level, solves it,
//! and emits CSV/VTK reports with fitted convergence rates.

mod config;
mod vtk;

pub use config::RunConfig;
pub use vtk::emit_vtk;

use crate::cases::{example_case, ManufacturedCase};
use crate::error::{Result, SdgError};
use crate::fields::{compute_errors, ErrorRecord};
use crate::forms::{assemble_linear_blocks, assemble_rhs, CoupledSpaces};
use crate::mesh::{
    build_interface_glue, build_staggered, generate_primal, MeshKind, PointRule, Rect, Side,
    StaggeredMesh, Subdomain,
};
use crate::solver::{solve_coupled, CoupledSolution};
use crate::verify::{fit_rate, RateFit};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub ndof_sigma: usize,
    pub ndof_u_s: usize,
    pub ndof_p_s: usize,
    pub ndof_u_d: usize,
    pub ndof_p_d: usize,
    pub errors: Option<ErrorRecord>,
    pub picard_iters: usize,
    pub seconds: f64,
}

/// Fitted rates for every error column, present with three or more levels.
#[derive(Debug, Clone)]
pub struct RateSummary {
    pub sigma_l2: RateFit,
    pub u_s_l2: RateFit,
    pub p_s_l2: RateFit,
    pub u_d_l2: RateFit,
    pub p_d_l2: RateFit,
    pub u_s_h: RateFit,
    pub p_d_zd: RateFit,
    pub super_u_s: RateFit,
    pub super_p_d: RateFit,
}

impl RateSummary {
    pub fn l2_slopes(&self) -> [f64; 5] {
        [
            self.sigma_l2.slope,
            self.u_s_l2.slope,
            self.p_s_l2.slope,
            self.u_d_l2.slope,
            self.p_d_l2.slope,
        ]
    }

    pub fn energy_slopes(&self) -> [f64; 2] {
        [self.u_s_h.slope, self.p_d_zd.slope]
    }

    pub fn super_slopes(&self) -> [f64; 2] {
        [self.super_u_s.slope, self.super_p_d.slope]
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<LevelRow>,
    pub rates: Option<RateSummary>,
}

pub const CSV_HEADER: &str = "level,h,ndof_sigma,ndof_uS,ndof_pS,ndof_uD,ndof_pD,e_sigma_L2,e_uS_L2,e_pS_L2,e_uD_L2,e_pD_L2,e_uS_h,e_pD_ZD,e_super_uS,e_super_pD,picard_iters,seconds";

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let e = row.errors.clone().unwrap_or_default();
            let err_cols: Vec<String> = if row.errors.is_some() {
                [
                    e.sigma_l2, e.u_s_l2, e.p_s_l2, e.u_d_l2, e.p_d_l2, e.u_s_h, e.p_d_zd,
                    e.super_u_s, e.super_p_d,
                ]
                .iter()
                .map(|v| format!("{v}"))
                .collect()
            } else {
                vec!["nan".into(); 9]
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:.3}\n",
                row.level,
                row.h,
                row.ndof_sigma,
                row.ndof_u_s,
                row.ndof_p_s,
                row.ndof_u_d,
                row.ndof_p_d,
                err_cols.join(","),
                row.picard_iters,
                row.seconds,
            ));
        }
        out
    }

    pub fn rates_text(&self) -> String {
        let Some(r) = &self.rates else {
            return String::from("rates: need >= 3 levels\n");
        };
        let mut out = String::new();
        for (name, fit) in [
            ("sigma_L2", &r.sigma_l2),
            ("uS_L2", &r.u_s_l2),
            ("pS_L2", &r.p_s_l2),
            ("uD_L2", &r.u_d_l2),
            ("pD_L2", &r.p_d_l2),
            ("uS_h", &r.u_s_h),
            ("pD_ZD", &r.p_d_zd),
            ("super_uS", &r.super_u_s),
            ("super_pD", &r.super_p_d),
        ] {
            out.push_str(&format!(
                "{name}: slope {:.3} steps [{}]\n",
                fit.slope,
                fit.step_orders
                    .iter()
                    .map(|s| format!("{s:.3}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        out
    }
}

/// Meshes for one refinement level of a case.
pub fn level_meshes(
    case: &ManufacturedCase,
    config: &RunConfig,
    nx: usize,
) -> Result<(Arc<StaggeredMesh>, Arc<StaggeredMesh>)> {
    let mesh_s = subdomain_mesh(
        &config.kind_s,
        case.omega_s,
        nx,
        Subdomain::Stokes,
        case.interface_side_s,
        config.distortion,
        config.seed,
    )?;
    let nx_d = if config.nonmatching { nx + 1 } else { nx };
    let mesh_d = subdomain_mesh(
        &config.kind_d,
        case.omega_d,
        nx_d,
        Subdomain::Darcy,
        case.interface_side_d,
        config.distortion,
        config.seed.wrapping_add(1),
    )?;
    Ok((mesh_s, mesh_d))
}

/// Builds one subdomain mesh with `nx` cells along the interface direction
/// and near-square cells in the other direction.
pub fn subdomain_mesh(
    kind: &MeshKind,
    domain: Rect,
    nx: usize,
    subdomain: Subdomain,
    interface_side: Side,
    distortion: f64,
    seed: u64,
) -> Result<Arc<StaggeredMesh>> {
    let horizontal = matches!(interface_side, Side::Top | Side::Bottom);
    let (cells_x, cells_y) = if horizontal {
        let ny = ((nx as f64 * domain.height() / domain.width()).round() as usize).max(1);
        (nx, ny)
    } else {
        let nyx = ((nx as f64 * domain.width() / domain.height()).round() as usize).max(1);
        (nyx, nx)
    };
    let primal = generate_primal(
        kind,
        cells_x,
        cells_y,
        domain,
        distortion,
        seed,
        subdomain,
        Some(interface_side),
    )?;
    Ok(Arc::new(build_staggered(primal, PointRule::Centroid)?))
}

/// Solves one level of a case and returns the solution with its spaces.
pub fn solve_level(
    case: &ManufacturedCase,
    config: &RunConfig,
    nx: usize,
) -> Result<(CoupledSolution, CoupledSpaces)> {
    let (mesh_s, mesh_d) = level_meshes(case, config, nx)?;
    let mut params = case.params.clone();
    if let Some(g) = config.g_override {
        params.g_bjs = g;
    }
    let spaces = CoupledSpaces::build(
        mesh_s.clone(),
        mesh_d.clone(),
        config.degree,
        &*case.darcy_dirichlet,
    )?;
    let glue = build_interface_glue(&mesh_s, &mesh_d)?;
    let system = assemble_linear_blocks(&spaces, &params, &glue)?;
    let rhs = assemble_rhs(case, &spaces, &glue, &system)?;
    let solution = solve_coupled(&spaces, &system, &rhs, &params, &config.picard)?;
    Ok((solution, spaces))
}

/// Runs the full refinement study of a config: per level, generate meshes,
/// glue, assemble, solve and measure; then fit rates and write reports.
/// Partial reports are written even when a later level fails.
pub fn run_convergence(config: &RunConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let case = example_case(config.case_id)?;
    let mut rows: Vec<LevelRow> = Vec::new();
    let mut level_error: Option<SdgError> = None;

    let run_one = |nx: usize| -> Result<LevelRow> {
        let start = Instant::now();
        let (solution, spaces) = solve_level(&case, config, nx)
            .map_err(|err| SdgError::Config(format!("level nx = {nx}: {err}")))?;
        let errors = if case.has_exact() {
            Some(compute_errors(
                &solution.sigma,
                &solution.u_s,
                &solution.p_s,
                &solution.u_d,
                &solution.p_d,
                &case,
            )?)
        } else {
            None
        };
        let h = solution.u_s.space.mesh.h.max(solution.u_d.space.mesh.h);
        let seconds = if config.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        if config.emit_vtk {
            if let Some(dir) = &config.out_dir {
                std::fs::create_dir_all(dir)?;
                emit_vtk(&solution, &dir.join(format!("level_{nx}.vtk")))?;
            }
        }
        Ok(LevelRow {
            level: nx,
            h,
            ndof_sigma: spaces.layout.n_sigma,
            ndof_u_s: spaces.layout.n_us,
            ndof_p_s: spaces.layout.n_ps,
            ndof_u_d: spaces.layout.n_ud,
            ndof_p_d: spaces.layout.n_pd,
            errors,
            picard_iters: solution.trace.iterations(),
            seconds,
        })
    };

    if config.parallel_levels {
        // one thread per level; results keep level order, so reports are
        // identical to the sequential mode
        let results: Vec<Result<LevelRow>> = std::thread::scope(|scope| {
            let handles: Vec<_> = config
                .levels
                .iter()
                .map(|&nx| scope.spawn(move || run_one(nx)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("level thread")).collect()
        });
        for res in results {
            match res {
                Ok(row) => rows.push(row),
                Err(err) => {
                    level_error = Some(err);
                    break;
                }
            }
        }
    } else {
        for &nx in &config.levels {
            match run_one(nx) {
                Ok(row) => rows.push(row),
                Err(err) => {
                    level_error = Some(err);
                    break;
                }
            }
        }
    }

    let rates = fit_all_rates(&rows);
    let report = ConvergenceReport { rows, rates };

    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), report.to_csv())?;
        std::fs::write(dir.join("rates.txt"), report.rates_text())?;
    }
    if let Some(err) = level_error {
        return Err(err);
    }
    Ok(report)
}

fn fit_all_rates(rows: &[LevelRow]) -> Option<RateSummary> {
    let with_errors: Vec<&LevelRow> = rows.iter().filter(|r| r.errors.is_some()).collect();
    if with_errors.len() < 3 {
        return None;
    }
    let series = |pick: &dyn Fn(&ErrorRecord) -> f64| -> Result<RateFit> {
        let pts: Vec<(f64, f64)> = with_errors
            .iter()
            .map(|r| (r.h, pick(r.errors.as_ref().unwrap())))
            .collect();
        fit_rate(&pts)
    };
    Some(RateSummary {
        sigma_l2: series(&|e| e.sigma_l2).ok()?,
        u_s_l2: series(&|e| e.u_s_l2).ok()?,
        p_s_l2: series(&|e| e.p_s_l2).ok()?,
        u_d_l2: series(&|e| e.u_d_l2).ok()?,
        p_d_l2: series(&|e| e.p_d_l2).ok()?,
        u_s_h: series(&|e| e.u_s_h).ok()?,
        p_d_zd: series(&|e| e.p_d_zd).ok()?,
        super_u_s: series(&|e| e.super_u_s).ok()?,
        super_p_d: series(&|e| e.super_p_d).ok()?,
    })
}

/// True when every configured expectation window contains its fitted slopes.
pub fn check_expectations(config: &RunConfig, report: &ConvergenceReport) -> bool {
    let Some(rates) = &report.rates else {
        return config.expect_l2.is_none()
            && config.expect_energy.is_none()
            && config.expect_super.is_none();
    };
    let within = |window: Option<(f64, f64)>, slopes: &[f64]| match window {
        None => true,
        Some((lo, hi)) => slopes.iter().all(|&s| s >= lo && s <= hi),
    };
    within(config.expect_l2, &rates.l2_slopes())
        && within(config.expect_energy, &rates.energy_slopes())
        && within(config.expect_super, &rates.super_slopes())
}
