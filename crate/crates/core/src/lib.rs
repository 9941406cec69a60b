//! Propagators of periodically driven two-level systems from a convergent,
//! secular-term-free expansion of the associated generalized Riccati equation.
//!
//! The pipeline runs
//! `InteractionSpec -> classify -> expand -> sum_at_epsilon -> assemble -> evaluate_u`,
//! and [`oracle`] provides an independent adaptive integrator to check it.

pub mod error;
pub mod fourier;
pub mod interaction;
pub mod mat2;
pub mod oracle;
pub mod parallel;
pub mod pipeline;
pub mod propagator;
pub mod riccati;
pub mod scenario;

pub use error::{Error, Result};
pub use num_complex::Complex64;
