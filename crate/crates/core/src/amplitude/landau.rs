//! Cubic and quintic Stuart–Landau coefficients and their equilibria.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::eigen::{CriticalPoint, ExpansionSetup, LinearEigenpair};
use super::vectors::{assemble, second_order_vectors, third_order_forcing, CorrectionVectors, SecondOrder};
use super::AmplitudeError;
use crate::linalg::Vec2;
use crate::math::sqrt;
use crate::params::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criticality {
    Supercritical,
    Subcritical,
}

impl Criticality {
    pub fn from_cubic(l_cubic: f64) -> Self {
        if l_cubic > 0.0 {
            Criticality::Supercritical
        } else {
            Criticality::Subcritical
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubicCoefficients {
    pub sigma: f64,
    pub l_cubic: f64,
    pub criticality: Criticality,
    pub second: SecondOrder,
    pub g11: Vec2,
    pub g13: Vec2,
    pub g3: Vec2,
}

/// `dA/dT = sigma A - L A³` from the third-order solvability condition.
pub fn cubic_landau(
    p: &ModelParams,
    cp: &CriticalPoint,
    setup: &ExpansionSetup,
    pair: &LinearEigenpair,
) -> Result<CubicCoefficients, AmplitudeError> {
    let second = second_order_vectors(p, cp, pair)?;
    let (g11, g13, g3) = third_order_forcing(p, cp, setup, pair, &second.w20, &second.w22);
    let rp = pair.rho.dot(&pair.psi);
    let sigma = g11.dot(&pair.psi) / rp;
    let l_cubic = g13.dot(&pair.psi) / rp;
    Ok(CubicCoefficients {
        sigma,
        l_cubic,
        criticality: Criticality::from_cubic(l_cubic),
        second,
        g11,
        g13,
        g3,
    })
}

/// `(sigma_bar, L_bar, Q_bar)` at one value of `eps²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarCoefficients {
    pub sigma_bar: f64,
    pub l_bar: f64,
    pub q_bar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LandauCoefficients {
    pub critical: CriticalPoint,
    pub eigenpair: LinearEigenpair,
    pub setup: ExpansionSetup,
    pub sigma: f64,
    pub l_cubic: f64,
    pub sigma_tilde: f64,
    pub l_tilde: f64,
    pub q_tilde: f64,
    pub sigma_bar: f64,
    pub l_bar: f64,
    pub q_bar: f64,
    pub criticality: Criticality,
    pub vectors: CorrectionVectors,
    /// Relative disagreement of the closed-form and solved second-order vectors.
    pub two_path_discrepancy: f64,
}

impl LandauCoefficients {
    /// Combined coefficients at another `eps²`, keeping `chi2` and `chi4`.
    pub fn bars(&self, eps_sq: f64) -> BarCoefficients {
        BarCoefficients {
            sigma_bar: self.sigma + eps_sq * self.sigma_tilde,
            l_bar: self.l_cubic + eps_sq * self.l_tilde,
            q_bar: eps_sq * self.q_tilde,
        }
    }
}

/// Pushes the expansion to fifth order and combines the result with the
/// cubic coefficients.
pub fn quintic_landau(
    p: &ModelParams,
    cp: &CriticalPoint,
    setup: &ExpansionSetup,
    pair: &LinearEigenpair,
) -> Result<LandauCoefficients, AmplitudeError> {
    let cubic = cubic_landau(p, cp, setup, pair)?;
    let (sigma, l) = (cubic.sigma, cubic.l_cubic);
    let v = assemble(p, cp, setup, pair, &cubic.second, sigma, l)?;
    let psi = pair.psi;
    let rp = pair.rho.dot(&psi);
    let sigma_tilde = (v.p11 - v.w31.scale(sigma)).dot(&psi) / rp;
    let l_tilde = (v.w32.scale(3.0 * sigma) - v.w31.scale(l) + v.p13).dot(&psi) / rp;
    let q_tilde = (v.w32.scale(3.0 * l) - v.p15).dot(&psi) / rp;
    let e2 = setup.eps_sq;
    Ok(LandauCoefficients {
        critical: *cp,
        eigenpair: *pair,
        setup: *setup,
        sigma,
        l_cubic: l,
        sigma_tilde,
        l_tilde,
        q_tilde,
        sigma_bar: sigma + e2 * sigma_tilde,
        l_bar: l + e2 * l_tilde,
        q_bar: e2 * q_tilde,
        criticality: cubic.criticality,
        vectors: v,
        two_path_discrepancy: cubic.second.two_path_discrepancy,
    })
}

/// `A_inf = sqrt(sigma / L)`, the stable amplitude of the cubic equation.
pub fn stationary_amplitude_cubic(sigma: f64, l_cubic: f64) -> Result<f64, AmplitudeError> {
    if !(l_cubic > 0.0) {
        return Err(AmplitudeError::Subcritical { l_cubic });
    }
    Ok(sqrt(sigma / l_cubic))
}

/// A nonzero equilibrium `A > 0` of `sigma A - L A³ + Q A⁵`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    pub amplitude: f64,
    pub stable: bool,
}

/// Positive equilibria of `dA/dT = sigma A - L A³ + Q A⁵`, smallest first.
///
/// Stability follows from the sign of the derivative, which at a nonzero
/// root equals `2 A² (2 Q A² - L)`.
pub fn amplitude_equilibria(sigma: f64, l: f64, q: f64) -> Vec<Equilibrium> {
    let mut roots = Vec::new();
    // Q R² - L R + sigma = 0 with R = A²
    if q == 0.0 {
        if l != 0.0 {
            roots.push(sigma / l);
        }
    } else {
        let disc = l * l - 4.0 * sigma * q;
        if disc >= 0.0 {
            let sd = sqrt(disc);
            let t = 0.5 * (l + if l >= 0.0 { sd } else { -sd });
            if t != 0.0 {
                roots.push(t / q);
                roots.push(sigma / t);
            } else {
                roots.push(0.0);
            }
        }
    }
    let mut out: Vec<Equilibrium> = roots
        .into_iter()
        .filter(|r| *r > 0.0 && r.is_finite())
        .map(|r| Equilibrium { amplitude: sqrt(r), stable: 2.0 * q * r - l < 0.0 })
        .collect();
    out.sort_by(|a, b| a.amplitude.total_cmp(&b.amplitude));
    out.dedup_by(|a, b| a.amplitude == b.amplitude);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuinticEquilibria {
    /// `A_bar_inf`, the stable nonzero equilibrium.
    pub stable: Option<f64>,
    /// The companion root, when it is positive.
    pub unstable: Option<f64>,
}

/// Stable and unstable nonzero amplitudes of the quintic equation. Both are
/// absent when there is no nonzero equilibrium.
pub fn stationary_amplitude_quintic(sigma_bar: f64, l_bar: f64, q_bar: f64) -> QuinticEquilibria {
    let eq = amplitude_equilibria(sigma_bar, l_bar, q_bar);
    QuinticEquilibria {
        stable: eq.iter().rev().find(|e| e.stable).map(|e| e.amplitude),
        unstable: eq.iter().find(|e| !e.stable).map(|e| e.amplitude),
    }
}
