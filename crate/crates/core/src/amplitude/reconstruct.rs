//! Asymptotic stationary patterns built from the correction vectors.

use alloc::vec::Vec;

use serde::Serialize;

use super::landau::{stationary_amplitude_cubic, stationary_amplitude_quintic, LandauCoefficients};
use super::AmplitudeError;
use crate::linalg::Vec2;
use crate::math::{copysign, cos, sqrt};
use crate::params::{uniform_steady_state, ModelParams};

/// A reconstructed pattern sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternField {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Signed amplitude `A` substituted into the series.
    pub amplitude: f64,
    /// Coefficient of `cos(kx)` in `u - u_c`.
    pub fundamental: f64,
    pub order: u32,
}

/// Evaluates `u_c + sum_{j <= order} eps^j w_j` for amplitude `a` (which may
/// be negative to select the phase-shifted pattern).
pub fn reconstruct_series(
    p: &ModelParams,
    c: &LandauCoefficients,
    eps: f64,
    a: f64,
    order: u32,
    x: &[f64],
) -> PatternField {
    let v = &c.vectors;
    let rho = c.eigenpair.rho;
    let k = c.critical.k;
    let ss = uniform_steady_state(p);
    let (a2, a3, a4) = (a * a, a * a * a, a * a * a * a);
    let (e2, e3, e4) = (eps * eps, eps * eps * eps, eps * eps * eps * eps);

    // Harmonic coefficients 0..4 of w.
    let mut h = [Vec2::ZERO; 5];
    if order >= 1 {
        h[1] += rho.scale(eps * a);
    }
    if order >= 2 {
        h[0] += v.w20.scale(e2 * a2);
        h[2] += v.w22.scale(e2 * a2);
    }
    if order >= 3 {
        h[1] += (v.w31.scale(a) + v.w32.scale(a3)).scale(e3);
        h[3] += v.w33.scale(e3 * a3);
    }
    if order >= 4 {
        h[0] += (v.w40.scale(a2) + v.w41.scale(a4)).scale(e4);
        h[2] += (v.w42.scale(a2) + v.w43.scale(a4)).scale(e4);
        h[4] += v.w44.scale(e4 * a4);
    }

    let mut u = Vec::with_capacity(x.len());
    let mut vv = Vec::with_capacity(x.len());
    for &xi in x {
        let mut w = h[0];
        for (j, hj) in h.iter().enumerate().skip(1) {
            w += hj.scale(cos(j as f64 * k * xi));
        }
        u.push(ss.u_bar + w.first());
        vv.push(ss.v_bar + w.second());
    }
    PatternField { x: x.to_vec(), u, v: vv, amplitude: a, fundamental: h[1].first(), order }
}

fn eps_of(c: &LandauCoefficients) -> Result<f64, AmplitudeError> {
    let e2 = c.setup.eps_sq;
    if e2 < 0.0 {
        return Err(AmplitudeError::NegativeEpsSquared(e2));
    }
    Ok(sqrt(e2))
}

/// Second-order pattern with `A = ±sqrt(sigma / L)`; `sign` picks the phase.
pub fn reconstruct_second_order(
    p: &ModelParams,
    c: &LandauCoefficients,
    sign: f64,
    x: &[f64],
) -> Result<PatternField, AmplitudeError> {
    let eps = eps_of(c)?;
    let a = stationary_amplitude_cubic(c.sigma, c.l_cubic)?;
    Ok(reconstruct_series(p, c, eps, copysign(a, sign), 2, x))
}

/// Fourth-order pattern with `A = ±A_bar_inf` of the quintic equation.
pub fn reconstruct_fourth_order(
    p: &ModelParams,
    c: &LandauCoefficients,
    sign: f64,
    x: &[f64],
) -> Result<PatternField, AmplitudeError> {
    let eps = eps_of(c)?;
    let a = stationary_amplitude_quintic(c.sigma_bar, c.l_bar, c.q_bar).stable.ok_or(
        AmplitudeError::NoStableAmplitude { sigma_bar: c.sigma_bar, l_bar: c.l_bar, q_bar: c.q_bar },
    )?;
    Ok(reconstruct_series(p, c, eps, copysign(a, sign), 4, x))
}
