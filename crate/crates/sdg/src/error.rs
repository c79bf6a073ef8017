//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdgError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell {cell} rejected: {reason}")]
    CellRejected { cell: usize, reason: String },

    #[error("cell {cell} violates star-shapedness: interior point outside the kernel (margin {margin:.3e})")]
    NonStarShaped { cell: usize, margin: f64 },

    #[error("interface geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(usize),

    #[error("unsupported polynomial degree {0} (supported: 1..=3)")]
    UnsupportedOrder(usize),

    #[error("unknown triangle id {0}")]
    UnknownTriangle(usize),

    #[error("unknown example case {0}")]
    UnknownCase(u32),

    #[error("assembly integrity: {0}")]
    AssemblyIntegrity(String),

    #[error("singular permeability tensor at ({x}, {y})")]
    SingularPermeability { x: f64, y: f64 },

    #[error("linear solver failed: {0}")]
    LinearSolve(String),

    #[error("iterative solver stagnated after {iters} iterations (residual {residual:.3e})")]
    Stagnation { iters: usize, residual: f64 },

    #[error("nonlinear solve did not converge in {iters} iterations (last increment {increment:.3e}, residual {residual:.3e})")]
    NonConvergence {
        iters: usize,
        increment: f64,
        residual: f64,
        /// Per-iteration (increment, residual) history.
        trace: Vec<(f64, f64)>,
    },

    #[error("norm kind {norm} incompatible with space {space}")]
    IncompatibleNorm { norm: String, space: String },

    #[error("rate fit needs at least 3 levels with positive errors ({0} usable)")]
    TooFewLevels(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SdgError>;
