//! Reference solutions independent of the transform pipeline.

pub mod mc;
pub mod pde;
pub mod sparse;

pub use mc::{absorption_bound, mc_escape_prob, path_rng, simulate_path, McConfig, McEstimate, PathOutcome};
pub use pde::{pde_solve, PdeConfig, PdeGrid};
