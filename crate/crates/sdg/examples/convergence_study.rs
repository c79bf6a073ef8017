//! Refinement study on the first benchmark: halves h per level, fits the
//! convergence order of every reported error, and prints the CSV report.

use sdg::harness::{run_convergence, RunConfig};
use sdg::mesh::MeshKind;

fn main() -> sdg::Result<()> {
    let mut config = RunConfig {
        levels: vec![4, 8, 16, 32],
        timing: true,
        ..Default::default()
    };
    if let Some(kind) = std::env::args().nth(1) {
        let kind = MeshKind::parse(&kind).expect("triangular|rectangular|distorted");
        config.kind_s = kind.clone();
        config.kind_d = kind;
        config.distortion = 0.3;
        config.seed = 7;
    }
    if let Some(case) = std::env::args().nth(2) {
        config.case_id = case.parse().expect("case id");
    }

    let report = run_convergence(&config)?;
    print!("{}", report.to_csv());
    println!();
    print!("{}", report.rates_text());
    Ok(())
}
