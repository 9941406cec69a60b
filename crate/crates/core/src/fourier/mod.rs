//! Generalized Fourier-series arithmetic and the special functions it needs.

mod bessel;
mod series;

pub use bessel::{bessel_j, bessel_j_orders, find_bessel_zero, MAX_ARG, MAX_ORDER};
pub(crate) use bessel::bessel_j_unchecked;
pub use series::{HarmonicSeries, DEFAULT_M_MAX, MEAN_REL_TOL, RESONANCE_REL_TOL};
