//! Compares the two nonlinear schemes on the same assembled system: the
//! frozen-coefficient fixed point and its Newton correction. Writes both
//! iteration traces as CSV.

use sdg::cases::example_case;
use sdg::harness::{solve_level, RunConfig};
use sdg::solver::{NonlinearScheme, PicardSettings};

fn main() -> sdg::Result<()> {
    let case = example_case(1)?;
    let out = std::env::temp_dir().join("sdg_picard_trace");
    std::fs::create_dir_all(&out)?;

    for (name, scheme) in [
        ("picard", NonlinearScheme::Picard),
        ("newton", NonlinearScheme::Newton),
    ] {
        let config = RunConfig {
            levels: vec![8],
            picard: PicardSettings {
                scheme,
                max_iters: 200,
                ..Default::default()
            },
            ..Default::default()
        };
        let (solution, _) = solve_level(&case, &config, 8)?;
        let trace = &solution.trace;
        println!(
            "{name:6}: {} iterations (converged: {})",
            trace.iterations(),
            trace.converged
        );
        for (i, (inc, res)) in trace
            .increments
            .iter()
            .zip(&trace.residuals)
            .enumerate()
            .take(10)
        {
            println!("   iter {:3}: increment {inc:.3e}  residual {res:.3e}", i + 1);
        }
        if trace.iterations() > 10 {
            println!("   ... ({} more)", trace.iterations() - 10);
        }
        let path = out.join(format!("{name}.csv"));
        std::fs::write(&path, trace.to_csv())?;
        println!("   trace written to {}", path.display());
    }
    Ok(())
}
