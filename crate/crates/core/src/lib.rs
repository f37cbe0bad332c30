//! Escape and absorption probabilities of an obliquely reflected Brownian
//! motion in the quadrant that is absorbed at the corner.
//!
//! The pipeline goes from parameters ([`model`]) through the kernel
//! ([`kernel`]), the gluing function ([`gluing`]) and the boundary value
//! problem ([`bvp`]) to probabilities ([`inversion`]). Two independent
//! reference solutions live in [`oracles`].

pub mod bvp;
pub mod error;
pub mod gluing;
pub mod inversion;
pub mod kernel;
pub mod model;
pub mod oracles;
pub mod quadrature;

pub use error::{BvpError, GluingError, InversionError, KernelError, ModelError, OracleError};
pub use model::{ModelParams, WedgeGeometry, Classification, AxisRegime};
pub use num_complex::Complex64;
