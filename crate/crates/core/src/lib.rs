//! Isothermal two-phase flow of a van der Waals fluid with mass transfer
//! driven by free energy relaxation, able to represent metastable phases.
//!
//! * [`thermo`]: equation of state and potentials.
//! * [`equilibrium`]: spinodal bounds, Maxwell construction, mixtures.
//! * [`relaxation`]: the transfer dynamical system and its integrator.
//! * [`hydro`]: Rusanov finite volume scheme with fractional-step source.
//! * [`scenario`]: configuration, Riemann initialisation, driver and output.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod hydro;
mod numerics;
pub mod relaxation;
pub mod scenario;
pub mod thermo;

pub use error::{Error, Result};
pub use numerics::{bisect, gauss_legendre, integrate};
