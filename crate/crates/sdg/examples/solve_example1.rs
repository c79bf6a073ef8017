//! Solves the first manufactured benchmark on one mesh level and prints the
//! solver trace and all error norms.

use sdg::cases::example_case;
use sdg::fields::compute_errors;
use sdg::harness::{solve_level, RunConfig};

fn main() -> sdg::Result<()> {
    let case = example_case(1)?;
    let config = RunConfig {
        levels: vec![8],
        ..Default::default()
    };
    let (solution, spaces) = solve_level(&case, &config, 8)?;

    println!("unknowns: {}", spaces.layout.total());
    println!(
        "nonlinear iterations: {} (converged: {})",
        solution.trace.iterations(),
        solution.trace.converged
    );
    for (i, (inc, res)) in solution
        .trace
        .increments
        .iter()
        .zip(&solution.trace.residuals)
        .enumerate()
    {
        println!("  iter {:2}: increment {inc:.3e}  residual {res:.3e}", i + 1);
    }

    let errors = compute_errors(
        &solution.sigma,
        &solution.u_s,
        &solution.p_s,
        &solution.u_d,
        &solution.p_d,
        &case,
    )?;
    println!("errors: {errors:#?}");
    Ok(())
}
