//! Pattern formation in a one-dimensional volume-filling chemotaxis model with
//! logistic growth:
//!
//! ```text
//! u_t = (d1 u_x - chi u (1 - u) v_x)_x + mu u (1 - u / u_c)
//! v_t = d2 v_xx + alpha u - beta v
//! ```
//!
//! on `[0, l]` with no-flux boundaries.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every numerical piece:
//!
//! * [`params`]: model constants and the uniform steady state.
//! * [`stability`]: dispersion relation, thresholds, unstable bands, discrete modes.
//! * [`amplitude`]: weakly nonlinear expansion up to fifth order, cubic and quintic
//!   Stuart–Landau coefficients, saddle-node location and pattern reconstruction.
//! * [`competition`]: two-mode amplitude equations, equilibria and basins.
//! * [`pde`]: finite-difference method-of-lines solver and pattern measurement.
//!
//! File formats, configuration and the command-line front end live in the
//! `chemopattern` crate.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod amplitude;
pub mod competition;
pub mod linalg;
pub mod params;
pub mod pde;
pub mod stability;

mod math;
#[cfg(test)]
mod testutil;

pub use params::{ModelParams, ParamError, UniformSteadyState, ValidatedParams};
