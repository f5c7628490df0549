//! Weakly nonlinear expansion around the first instability.
//!
//! With `chi = chi_c + eps² chi2 + eps⁴ chi4` the deviation from the uniform
//! state is expanded as `w = eps w1 + eps² w2 + ...`. Every order reduces to
//! 2×2 systems `L_i x = rhs` per cosine harmonic `i`, where
//! `L_i = K - i² k² D^{chi_c}`. The harmonic `i = 1` is singular and only
//! solvable when `rhs · psi = 0`; that condition fixes the amplitude
//! equation
//!
//! ```text
//! dA/dT = sigma_bar A - L_bar A³ + Q_bar A⁵
//! ```
//!
//! whose cubic truncation is used in the supercritical regime (`L > 0`).

mod bifurcation;
mod eigen;
mod landau;
mod reconstruct;
mod vectors;

use alloc::vec::Vec;

use serde::Serialize;

use crate::stability::StabilityError;

pub use bifurcation::{
    bifurcation_branches, chi_s, saddle_node_discriminant, BifurcationReport, BranchKind, BranchPoint,
    DiscriminantSample,
};
pub use eigen::{
    eigenpair, solve_reduced, solve_reduced_with, CriticalPoint, ExpansionSetup, KernelGauge,
    LinearEigenpair, ModeChoice,
};
pub use landau::{
    amplitude_equilibria, cubic_landau, quintic_landau, stationary_amplitude_cubic,
    stationary_amplitude_quintic, BarCoefficients, Criticality, CubicCoefficients, Equilibrium,
    LandauCoefficients, QuinticEquilibria,
};
pub use reconstruct::{reconstruct_fourth_order, reconstruct_second_order, reconstruct_series, PatternField};
pub use vectors::{second_order_vectors, CorrectionVectors, SecondOrder};

/// Relative determinant guard for the non-singular harmonics.
pub const RESONANCE_TOL: f64 = 1e-12;
/// Bound on `|rhs · psi| / (|rhs| |psi|)` for the singular harmonic.
pub const SOLVABILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, thiserror::Error)]
pub enum AmplitudeError {
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("resonant second harmonic: det(L_2) = {det:e}; perturb the parameters")]
    ResonantSecondHarmonic { det: f64 },
    #[error("resonant harmonic {harmonic}: det(L_{harmonic}) = {det:e}")]
    Resonance { harmonic: u32, det: f64 },
    #[error("solvability violated in {context}: |rhs.psi| / (|rhs| |psi|) = {residual:e}")]
    Solvability { context: &'static str, residual: f64 },
    #[error("subcritical (L = {l_cubic}): use quintic")]
    Subcritical { l_cubic: f64 },
    #[error("no stable nonzero amplitude for sigma_bar = {sigma_bar}, L_bar = {l_bar}, Q_bar = {q_bar}")]
    NoStableAmplitude { sigma_bar: f64, l_bar: f64, q_bar: f64 },
    #[error("reconstruction needs eps² >= 0, got {0}")]
    NegativeEpsSquared(f64),
    #[error("chi_s not found: {reason}")]
    ChiSNotFound { reason: &'static str, scan: Vec<DiscriminantSample> },
}
