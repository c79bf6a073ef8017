//! Staggered discontinuous Galerkin solver for the coupled Stokes /
//! Darcy-Forchheimer system on quadrilateral and polygonal meshes.
//!
//! The crate is organized around the solution pipeline:
//!
//! * [`mesh`] — primal polygonal partitions, their staggered simplicial
//!   subdivision, and the interface glue joining the two subdomains across
//!   (possibly nonmatching) grids.
//! * [`femspace`] — degrees of freedom, local bases and quadrature for the
//!   three staggered spaces (velocity-type `U`, flux-type `V`, pressure `P`).
//! * [`forms`] — assembly of all bilinear forms, the interface coupling and
//!   the linearized Forchheimer block into a named-block sparse system.
//! * [`solver`] — the fixed-point loop around sparse direct solves.
//! * [`fields`] — discrete fields, projection operators and the mesh-dependent
//!   norms used for error reporting.
//! * [`cases`] — manufactured and benchmark problem definitions.
//! * [`verify`] — numerical verification of algebraic identities,
//!   monotonicity, inf-sup constants and convergence-rate fitting.
//! * [`harness`] — configuration, refinement studies and report emission.
//!
//! See the crate examples for runnable entry points into each capability; the
//! `sdg` binary wraps the same calls behind a small CLI.

pub mod cases;
pub mod error;
pub mod femspace;
pub mod fields;
pub mod forms;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod verify;

pub use error::{Result, SdgError};
