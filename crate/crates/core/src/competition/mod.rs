//! Competition between two simultaneously unstable modes.
//!
//! With `w1 = A1 rho_1 cos(k1 x) + A2 rho_2 cos(k2 x)` the third-order
//! solvability conditions give
//!
//! ```text
//! dA1/dT = sigma1 A1 - L1 A1³ - Omega1 A1 A2²
//! dA2/dT = sigma2 A2 - L2 A2³ - Omega2 A2 A1²
//! ```
//!
//! Each semi-trivial equilibrium is a single-mode pattern; which one is
//! reached depends on the basin the initial amplitudes lie in.

mod dynamics;

use alloc::vec::Vec;

use serde::Serialize;

use crate::linalg::{Mat2, Vec2};
use crate::math::{cos, sq};
use crate::params::{uniform_steady_state, ModelParams};
use crate::stability::{self, StabilityError};

pub use dynamics::{
    basin_label, basin_map, equilibria, integrate_amplitudes, BasinLabel, BasinMap, EquilibriumClass,
    EquilibriumPoint, EquilibriumSet, IntegrationOptions, Trajectory, TrajectorySample,
};

/// Relative determinant guard for the second-order solves.
pub const RESONANCE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, thiserror::Error)]
pub enum CompetitionError {
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("the two wavenumbers must differ")]
    IdenticalModes,
    #[error("mode k = {k} is not unstable at chi = {chi}")]
    ModeNotUnstable { k: f64, chi: f64 },
    #[error("harmonic resonance between modes in the {system} system: det = {det:e}")]
    Resonance { system: &'static str, det: f64 },
    #[error("initial amplitudes must be non-negative and finite")]
    InvalidStart,
    #[error("amplitudes diverged (|A| = {norm:e} at T = {t})")]
    Diverged { t: f64, norm: f64 },
    #[error("step size underflow at T = {t}")]
    StepUnderflow { t: f64 },
}

/// Coefficients of the two-mode amplitude system and the vectors they are built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompetitionCoefficients {
    pub k1: f64,
    pub k2: f64,
    pub eps: f64,
    pub chi_c: f64,
    pub chi2: f64,
    pub m1: f64,
    pub m2: f64,
    pub m1_star: f64,
    pub m2_star: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub l1: f64,
    pub l2: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// Per-mode mean and second-harmonic vectors, index 0 for `k1`.
    pub w20: [Vec2; 2],
    pub w22: [Vec2; 2],
    /// Vectors of the sum and difference harmonics `cos((k1 ± k2) x)`.
    pub w2p: Vec2,
    pub w2m: Vec2,
    pub f_p: Vec2,
    pub f_m: Vec2,
    pub g11: [Vec2; 2],
    pub g13: [Vec2; 2],
    pub g12: [Vec2; 2],
    /// Largest relative residual over the second-order solves.
    pub max_residual: f64,
}

impl CompetitionCoefficients {
    /// Right-hand side of the amplitude system.
    pub fn flow(&self, a: [f64; 2]) -> [f64; 2] {
        let (x, y) = (a[0], a[1]);
        [
            self.sigma1 * x - self.l1 * x * x * x - self.omega1 * x * y * y,
            self.sigma2 * y - self.l2 * y * y * y - self.omega2 * y * x * x,
        ]
    }

    /// Analytic Jacobian of [`CompetitionCoefficients::flow`].
    pub fn jacobian(&self, a: [f64; 2]) -> Mat2 {
        let (x, y) = (a[0], a[1]);
        Mat2::new(
            self.sigma1 - 3.0 * self.l1 * x * x - self.omega1 * y * y,
            -2.0 * self.omega1 * x * y,
            -2.0 * self.omega2 * x * y,
            self.sigma2 - 3.0 * self.l2 * y * y - self.omega2 * x * x,
        )
    }
}

fn checked_solve(
    l: Mat2,
    rhs: Vec2,
    system: &'static str,
    max_res: &mut f64,
) -> Result<Vec2, CompetitionError> {
    let x = l.solve(&rhs, RESONANCE_TOL).ok_or(CompetitionError::Resonance { system, det: l.det() })?;
    let scale = l.norm() * x.norm() + rhs.norm();
    if scale > 0.0 {
        *max_res = max_res.max((l.mul_vec(&x) - rhs).norm() / scale);
    }
    Ok(x)
}

/// Assembles the two-mode system at `chi = chi_c (1 + eps²)` with `chi2 = chi_c`.
pub fn competition_coefficients(
    p: &ModelParams,
    k1: f64,
    k2: f64,
    eps: f64,
) -> Result<CompetitionCoefficients, CompetitionError> {
    if k1 == k2 {
        return Err(CompetitionError::IdenticalModes);
    }
    let cc = stability::chi_c(p)?;
    let chi = cc * (1.0 + eps * eps);
    let at = p.with_chi(chi);
    for k in [k1, k2] {
        if !(stability::lambda_plus(k * k, &at) > 0.0) {
            return Err(CompetitionError::ModeNotUnstable { k, chi });
        }
    }
    let chi2 = cc;
    let (uc, mu) = (p.u_c, p.mu);
    let s = 2.0 * uc - 1.0;
    let ks = [k1, k2];
    let m = ks.map(|k| (p.beta + k * k * p.d2) / p.alpha);
    let m_star = ks.map(|k| p.alpha / (p.mu + p.d1 * k * k));
    let mut max_res = 0.0;

    let mut w20 = [Vec2::ZERO; 2];
    let mut w22 = [Vec2::ZERO; 2];
    for l in 0..2 {
        let f0 = Vec2::first_only(mu / (2.0 * uc) * sq(m[l]));
        let f2 = Vec2::first_only(mu / (2.0 * uc) * sq(m[l]) - sq(ks[l]) * cc * (1.0 - 2.0 * uc) * m[l]);
        w20[l] = checked_solve(p.kinetics(), f0, "mean", &mut max_res)?;
        w22[l] = checked_solve(p.mode_operator(4.0 * sq(ks[l]), cc), f2, "second harmonic", &mut max_res)?;
    }
    let (m1, m2) = (m[0], m[1]);
    let base = mu / uc * m1 * m2;
    let mixed = k2 * k2 * m1 + k1 * k1 * m2;
    let cross = k1 * k2 * (m1 + m2);
    let f_p = Vec2::first_only(base + 0.5 * s * cc * (mixed + cross));
    let f_m = Vec2::first_only(base + 0.5 * s * cc * (mixed - cross));
    let w2p = checked_solve(p.mode_operator(sq(k1 + k2), cc), f_p, "sum harmonic", &mut max_res)?;
    let w2m = checked_solve(p.mode_operator(sq(k1 - k2), cc), f_m, "difference harmonic", &mut max_res)?;

    let mut g11 = [Vec2::ZERO; 2];
    let mut g13 = [Vec2::ZERO; 2];
    let mut g12 = [Vec2::ZERO; 2];
    let mut sigma = [0.0; 2];
    let mut l_self = [0.0; 2];
    let mut omega = [0.0; 2];
    for l in 0..2 {
        let o = 1 - l;
        let (k, ml) = (ks[l], m[l]);
        let (kk, mo) = (k * k, m[o]);
        g11[l] = Vec2::first_only(kk * chi2 * p.crowding());
        g13[l] = Vec2::first_only(
            s * cc * kk * (w22[l][1] * ml - 0.5 * w22[l][0] + w20[l][0])
                + 0.25 * cc * kk * ml * ml
                + mu / uc * ml * (2.0 * w20[l][0] + w22[l][0]),
        );
        g12[l] = Vec2::first_only(
            0.5 * s
                * cc
                * ((kk + k1 * k2) * w2p[1] * mo
                    + (kk - k1 * k2) * w2m[1] * mo
                    + k1 * k2 * (w2m[0] - w2p[0])
                    + 2.0 * w20[o][0] * kk)
                + 0.5 * cc * kk * mo * mo
                + mu / uc * (2.0 * w20[o][0] * ml + w2p[0] * mo + w2m[0] * mo),
        );
        let psi = Vec2::new(m_star[l], 1.0);
        let rp = Vec2::new(ml, 1.0).dot(&psi);
        sigma[l] = g11[l].dot(&psi) / rp;
        l_self[l] = g13[l].dot(&psi) / rp;
        omega[l] = g12[l].dot(&psi) / rp;
    }

    Ok(CompetitionCoefficients {
        k1,
        k2,
        eps,
        chi_c: cc,
        chi2,
        m1,
        m2,
        m1_star: m_star[0],
        m2_star: m_star[1],
        sigma1: sigma[0],
        sigma2: sigma[1],
        l1: l_self[0],
        l2: l_self[1],
        omega1: omega[0],
        omega2: omega[1],
        w20,
        w22,
        w2p,
        w2m,
        f_p,
        f_m,
        g11,
        g13,
        g12,
        max_residual: max_res,
    })
}

/// First-order two-mode pattern.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoModeField {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// `u = u_c + eps (A1 M1 cos k1x + A2 M2 cos k2x)`, `v = v_bar + eps (A1 cos k1x + A2 cos k2x)`.
pub fn reconstruct_two_mode(
    p: &ModelParams,
    cc: &CompetitionCoefficients,
    amplitudes: [f64; 2],
    eps: f64,
    x: &[f64],
) -> TwoModeField {
    let ss = uniform_steady_state(p);
    let (a1, a2) = (amplitudes[0], amplitudes[1]);
    let mut u = Vec::with_capacity(x.len());
    let mut v = Vec::with_capacity(x.len());
    for &xi in x {
        let (c1, c2) = (cos(cc.k1 * xi), cos(cc.k2 * xi));
        u.push(ss.u_bar + eps * (a1 * cc.m1 * c1 + a2 * cc.m2 * c2));
        v.push(ss.v_bar + eps * (a1 * c1 + a2 * c2));
    }
    TwoModeField { x: x.to_vec(), u, v }
}
