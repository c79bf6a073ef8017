//! Runs the verification toolbox on assembled systems: adjoint transpose
//! identities, interface skew-symmetry, projection orthogonality, pointwise
//! monotonicity/continuity of the momentum map, and inf-sup estimates.

use sdg::cases::example_case;
use sdg::forms::{assemble_linear_blocks, CoupledSpaces, PhysicalParams};
use sdg::harness::{level_meshes, RunConfig};
use sdg::mesh::build_interface_glue;
use sdg::verify::{
    check_adjoints, check_continuity, check_jh_orthogonality, check_monotonicity,
    estimate_infsup, inject_entry_fault, InfSupForm,
};
use std::sync::Arc;

fn main() -> sdg::Result<()> {
    let case = example_case(1)?;
    let exact = case.exact.as_ref().unwrap();
    let config = RunConfig::default();
    let (ms, md) = level_meshes(&case, &config, 4)?;
    let spaces = CoupledSpaces::build_all_dirichlet(ms.clone(), md.clone(), 1)?;
    let glue = build_interface_glue(&ms, &md)?;
    let system = assemble_linear_blocks(&spaces, &case.params, &glue)?;

    println!("adjoint transpose deviation : {:.3e}", check_adjoints(&system));
    println!("interface skew deviation    : {:.3e}", system.interface_skew_deviation());
    let faulty = inject_entry_fault(&system, 1e-3);
    println!("with injected fault         : {:.3e} (must be large)", check_adjoints(&faulty));

    let ud = exact.u_d.clone();
    let ortho = check_jh_orthogonality(
        &Arc::new(spaces.v_d.clone()),
        &Arc::new(spaces.u_d.clone()),
        &move |p| ud(p),
        20,
        1,
    )?;
    println!("flux projection orthogonality: {ortho:.3e}");

    let params = PhysicalParams::unit();
    println!("monotonicity margin (1000 samples): {:.12}", check_monotonicity(&params, 1000, 7));
    println!("continuity ratio   (1000 samples): {:.12}", check_continuity(&params, 1000, 8));

    for form in [InfSupForm::BS, InfSupForm::AS] {
        let mut line = String::new();
        for nx in [2usize, 4, 8] {
            let (ms, md) = level_meshes(&case, &config, nx)?;
            let spaces = CoupledSpaces::build_all_dirichlet(ms.clone(), md.clone(), 1)?;
            let glue = build_interface_glue(&ms, &md)?;
            let sys = assemble_linear_blocks(&spaces, &case.params, &glue)?;
            let est = estimate_infsup(form, &spaces, &sys)?;
            line.push_str(&format!("  nx={nx}: {:.4}", est.constant));
        }
        println!("inf-sup {form:?}:{line}");
    }
    Ok(())
}
