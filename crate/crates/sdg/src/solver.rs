//! Nonlinear solution of the coupled saddle-point system: a fixed-point loop
//! that freezes the Forchheimer weight (optionally with a Newton correction)
//! around sparse direct solves of the full coupled system.

use crate::error::{Result, SdgError};
use crate::fields::{compute_norm, DiscreteField, NormKind};
use crate::forms::{
    assemble_newton_darcy, assemble_picard_darcy, BlockSystem, CoupledSpaces, PhysicalParams,
    RhsBundle,
};
use crate::sparse::{bicgstab, norm2, sparse_lu_solve, spmv, Coo};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    Zero,
    /// First solve with the Forchheimer term frozen to zero (linear Darcy),
    /// then iterate on the nonlinear problem.
    DarcyLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearScheme {
    /// Freeze |u| from the previous iterate.
    Picard,
    /// Newton linearization of the Forchheimer term; quadratic near the
    /// solution, still one sparse solve per step.
    Newton,
}

#[derive(Debug, Clone)]
pub struct PicardSettings {
    pub tol_rel: f64,
    pub tol_res: f64,
    pub max_iters: usize,
    pub initial_guess: InitialGuess,
    pub scheme: NonlinearScheme,
    /// Fixed-point damping factor in (0, 1]; 1 = undamped.
    pub damping: f64,
}

impl Default for PicardSettings {
    fn default() -> Self {
        PicardSettings {
            tol_rel: 1e-10,
            tol_res: 1e-10,
            max_iters: 50,
            initial_guess: InitialGuess::Zero,
            scheme: NonlinearScheme::Newton,
            damping: 1.0,
        }
    }
}

impl PicardSettings {
    pub fn picard() -> Self {
        PicardSettings { scheme: NonlinearScheme::Picard, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinearStats {
    pub n_unknowns: usize,
    pub nnz: usize,
    pub rel_residual: f64,
}

/// Per-iteration history of the nonlinear loop.
#[derive(Debug, Clone, Default)]
pub struct SolveTrace {
    pub increments: Vec<f64>,
    pub residuals: Vec<f64>,
    pub linear: Vec<LinearStats>,
    pub converged: bool,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.increments.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,increment,residual,n_unknowns,nnz,linear_residual\n");
        for i in 0..self.increments.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i + 1,
                self.increments[i],
                self.residuals[i],
                self.linear[i].n_unknowns,
                self.linear[i].nnz,
                self.linear[i].rel_residual,
            ));
        }
        out
    }
}

/// The five solved fields with full coefficient vectors (constrained dofs
/// carry their prescribed values).
#[derive(Debug, Clone)]
pub struct CoupledSolution {
    pub sigma: DiscreteField,
    pub u_s: DiscreteField,
    pub p_s: DiscreteField,
    pub u_d: DiscreteField,
    pub p_d: DiscreteField,
    pub trace: SolveTrace,
}

/// Contract for a single linear solve.
#[derive(Debug, Clone, Copy)]
pub enum SolveContract {
    Direct,
    Iterative { tol: f64, max_iters: usize },
}

/// Solves `A x = b` under the given contract. Direct solves guarantee a
/// relative residual below 1e-10.
pub fn linear_solve(matrix: &Coo, rhs: &[f64], contract: SolveContract) -> Result<Vec<f64>> {
    match contract {
        SolveContract::Direct => sparse_lu_solve(&matrix.to_csc(), rhs),
        SolveContract::Iterative { tol, max_iters } => {
            bicgstab(&matrix.to_csc(), rhs, tol, max_iters)
        }
    }
}

/// Runs the nonlinear fixed-point loop on the assembled system and extracts
/// the solved fields. Convergence requires the nonlinear residual below
/// `tol_res` and, from the second iterate on, the relative increment of the
/// Darcy velocity below `tol_rel`.
pub fn solve_coupled(
    spaces: &CoupledSpaces,
    system: &BlockSystem,
    rhs: &RhsBundle,
    params: &PhysicalParams,
    settings: &PicardSettings,
) -> Result<CoupledSolution> {
    if !(settings.tol_rel > 0.0 && settings.tol_res > 0.0) || settings.max_iters == 0 {
        return Err(SdgError::Config("tolerances must be positive, max_iters >= 1".into()));
    }
    if !(settings.damping > 0.0 && settings.damping <= 1.0) {
        return Err(SdgError::Config("damping must lie in (0, 1]".into()));
    }
    let l = spaces.layout;
    let v_d = Arc::new(spaces.v_d.clone());
    let bnorm = norm2(&rhs.rhs).max(1.0);
    let mut trace = SolveTrace::default();

    let mut u_prev = DiscreteField::zeros(v_d.clone(), 1);
    if settings.initial_guess == InitialGuess::DarcyLinear {
        let mut frozen = params.clone();
        frozen.beta = 0.0;
        let m0 = assemble_picard_darcy(&spaces.v_d, None, &frozen)?;
        system.validate(Some(&m0))?;
        let x = sparse_lu_solve(&system.coupled_matrix(&m0).to_csc(), &rhs.rhs)?;
        set_from_free(&mut u_prev, &x[l.o_ud()..l.o_ud() + l.n_ud], &spaces.v_d);
    }

    let mut x = vec![0.0; l.total()];
    for iter in 1..=settings.max_iters {
        let (m_block, extra_rhs) = match settings.scheme {
            NonlinearScheme::Picard => {
                (assemble_picard_darcy(&spaces.v_d, Some(&u_prev), params)?, None)
            }
            NonlinearScheme::Newton => {
                let (m, corr) = assemble_newton_darcy(&spaces.v_d, &u_prev, params)?;
                (m, Some(corr))
            }
        };
        if iter == 1 && settings.initial_guess == InitialGuess::Zero {
            // structural checks once per solve (the sparsity of the Darcy
            // momentum block is scheme-independent)
            system.validate(Some(&m_block))?;
        }
        let matrix = system.coupled_matrix(&m_block);
        let mut b = rhs.rhs.clone();
        if let Some(corr) = &extra_rhs {
            for (i, v) in corr.iter().enumerate() {
                b[l.o_ud() + i] += v;
            }
        }
        let csc = matrix.to_csc();
        x = sparse_lu_solve(&csc, &b)?;
        let mut lin_res = b.clone();
        spmv(&csc, &x, -1.0, &mut lin_res);
        trace.linear.push(LinearStats {
            n_unknowns: l.total(),
            nnz: matrix.nnz(),
            rel_residual: norm2(&lin_res) / norm2(&b).max(1.0),
        });

        let mut u_new = DiscreteField::zeros(v_d.clone(), 1);
        set_from_free(&mut u_new, &x[l.o_ud()..l.o_ud() + l.n_ud], &spaces.v_d);

        let diff_norm = compute_norm(&u_new.minus(&u_prev), NormKind::L2)?;
        let new_norm = compute_norm(&u_new, NormKind::L2)?;
        let increment = diff_norm / new_norm.max(1.0);

        // nonlinear residual of the frozen-coefficient form at the new iterate
        let m_at_new = assemble_picard_darcy(&spaces.v_d, Some(&u_new), params)?;
        let mut res = rhs.rhs.clone();
        system
            .coupled_matrix(&m_at_new)
            .accumulate_matvec(&x, -1.0, &mut res);
        let residual = norm2(&res) / bnorm;

        trace.increments.push(increment);
        trace.residuals.push(residual);

        let inc_ok = increment <= settings.tol_rel || iter == 1;
        if residual <= settings.tol_res && inc_ok {
            trace.converged = true;
            break;
        }
        if settings.damping < 1.0 {
            let step = u_new.minus(&u_prev).scaled(settings.damping);
            for (p, s) in u_prev.coeffs.iter_mut().zip(&step.coeffs) {
                *p += s;
            }
        } else {
            u_prev = u_new;
        }
    }

    if !trace.converged {
        return Err(SdgError::NonConvergence {
            iters: trace.iterations(),
            increment: *trace.increments.last().unwrap_or(&f64::NAN),
            residual: *trace.residuals.last().unwrap_or(&f64::NAN),
            trace: trace
                .increments
                .iter()
                .zip(&trace.residuals)
                .map(|(&a, &b)| (a, b))
                .collect(),
        });
    }

    Ok(extract_solution(spaces, &x, rhs, trace))
}

fn set_from_free(field: &mut DiscreteField, free_vals: &[f64], space: &crate::femspace::FeSpace) {
    for d in 0..space.n_dofs() {
        if let Some(f) = space.dofs.free_index[d] {
            field.coeffs[d] = free_vals[f];
        }
    }
}

fn extract_solution(
    spaces: &CoupledSpaces,
    x: &[f64],
    rhs: &RhsBundle,
    trace: SolveTrace,
) -> CoupledSolution {
    let l = spaces.layout;
    let mut sigma = DiscreteField::zeros(Arc::new(spaces.v_s.clone()), 2);
    let mut u_s = DiscreteField::zeros(Arc::new(spaces.u_s.clone()), 2);
    let mut p_s = DiscreteField::zeros(Arc::new(spaces.p_s.clone()), 1);
    let mut u_d = DiscreteField::zeros(Arc::new(spaces.v_d.clone()), 1);
    let mut p_d = DiscreteField::zeros(Arc::new(spaces.u_d.clone()), 1);

    let n_vs = spaces.v_s.n_dofs();
    for d in 0..n_vs {
        let f = spaces.v_s.dofs.free_index[d].unwrap();
        for comp in 0..2 {
            sigma.coeffs[comp * n_vs + d] = x[l.o_sigma() + comp * l.nf_vs + f];
        }
    }
    let n_us = spaces.u_s.n_dofs();
    let clist_us = spaces.u_s.dofs.constrained_list();
    let n_c_us = clist_us.len();
    let cpos_us: std::collections::HashMap<usize, usize> =
        clist_us.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    for d in 0..n_us {
        for comp in 0..2 {
            u_s.coeffs[comp * n_us + d] = match spaces.u_s.dofs.free_index[d] {
                Some(f) => x[l.o_us() + comp * l.nf_us + f],
                None => rhs.xc_us[comp * n_c_us + cpos_us[&d]],
            };
        }
    }
    for d in 0..spaces.p_s.n_dofs() {
        p_s.coeffs[d] = x[l.o_ps() + d];
    }
    for d in 0..spaces.v_d.n_dofs() {
        u_d.coeffs[d] = x[l.o_ud() + spaces.v_d.dofs.free_index[d].unwrap()];
    }
    let clist_pd = spaces.u_d.dofs.constrained_list();
    let cpos_pd: std::collections::HashMap<usize, usize> =
        clist_pd.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    for d in 0..spaces.u_d.n_dofs() {
        p_d.coeffs[d] = match spaces.u_d.dofs.free_index[d] {
            Some(f) => x[l.o_pd() + f],
            None => rhs.xc_pd[cpos_pd[&d]],
        };
    }

    CoupledSolution { sigma, u_s, p_s, u_d, p_d, trace }
}
