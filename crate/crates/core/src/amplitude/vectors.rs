//! Correction vectors of orders two to four and the forcing terms that define them.

use serde::Serialize;

use super::eigen::{solve_reduced_with, CriticalPoint, ExpansionSetup, LinearEigenpair};
use super::AmplitudeError;
use crate::linalg::{Mat2, Vec2};
use crate::math::{abs, sq};
use crate::params::ModelParams;

/// Second-order vectors of `w2 = A² (W20 + W22 cos 2kx)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondOrder {
    /// Forcing of the mean; `L_0 W20 = F0 / 4`.
    pub f0: Vec2,
    /// Forcing of the second harmonic; `L_2 W22 = F2 / 4`.
    pub f2: Vec2,
    pub w20: Vec2,
    pub w22: Vec2,
    /// Same vectors from direct 2×2 solves.
    pub w20_solved: Vec2,
    pub w22_solved: Vec2,
    /// Largest relative disagreement between the two evaluation paths.
    pub two_path_discrepancy: f64,
}

pub fn second_order_vectors(
    p: &ModelParams,
    cp: &CriticalPoint,
    pair: &LinearEigenpair,
) -> Result<SecondOrder, AmplitudeError> {
    let (m, uc, k2, cc) = (pair.m, p.u_c, cp.k_sq(), cp.chi_c);
    let (alpha, beta) = (p.alpha, p.beta);
    let f0 = Vec2::first_only(2.0 * p.mu * m * m / uc);
    let f2 = Vec2::first_only(2.0 * p.mu * m * m / uc - 4.0 * k2 * m * cc * (1.0 - 2.0 * uc));

    let w20 = Vec2::new(-m * m / (2.0 * uc), -alpha * m * m / (2.0 * beta * uc));

    let l2 = cp.operator(p, 2);
    let w22_solved = l2
        .solve(&f2.scale(0.25), super::RESONANCE_TOL)
        .ok_or(AmplitudeError::ResonantSecondHarmonic { det: l2.det() })?;
    let denom = 4.0 * alpha * k2 * cc * p.crowding() - (p.mu + 4.0 * k2 * p.d1) * (beta + 4.0 * k2 * p.d2);
    let w22_2 = alpha * (p.mu * m * m / (2.0 * uc) - cc * k2 * m * (1.0 - 2.0 * uc)) / denom;
    let w22 = Vec2::new((beta + 4.0 * k2 * p.d2) / alpha * w22_2, w22_2);

    let w20_solved =
        p.kinetics().solve(&f0.scale(0.25), super::RESONANCE_TOL).expect("det K = mu beta is positive");

    let two_path_discrepancy = rel_diff(&w20, &w20_solved).max(rel_diff(&w22, &w22_solved));
    Ok(SecondOrder { f0, f2, w20, w22, w20_solved, w22_solved, two_path_discrepancy })
}

fn rel_diff(a: &Vec2, b: &Vec2) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (*a - *b).norm() / scale
    }
}

/// `|L x - rhs| / (|L| |x| + |rhs|)`.
pub(super) fn solve_residual(l: &Mat2, x: &Vec2, rhs: &Vec2) -> f64 {
    let scale = l.norm() * x.norm() + rhs.norm();
    if scale == 0.0 {
        0.0
    } else {
        (l.mul_vec(x) - *rhs).norm() / scale
    }
}

/// Every vector of the expansion up to fourth order together with the
/// forcing terms that produce them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrectionVectors {
    pub f0: Vec2,
    pub f2: Vec2,
    pub w20: Vec2,
    pub w22: Vec2,
    pub g11: Vec2,
    pub g13: Vec2,
    pub g3: Vec2,
    pub w31: Vec2,
    pub w32: Vec2,
    pub w33: Vec2,
    pub h02: Vec2,
    pub h04: Vec2,
    pub h22: Vec2,
    pub h24: Vec2,
    pub h4: Vec2,
    pub w40: Vec2,
    pub w41: Vec2,
    pub w42: Vec2,
    pub w43: Vec2,
    pub w44: Vec2,
    pub p11: Vec2,
    pub p13: Vec2,
    pub p15: Vec2,
    /// Largest `|rhs.psi| / (|rhs| |psi|)` over the two singular third-order systems.
    pub solvability_residual: f64,
    /// Largest relative residual over the third- and fourth-order solves.
    pub max_solve_residual: f64,
}

/// Third-order forcing `(G11, G13, G3)`.
pub(super) fn third_order_forcing(
    p: &ModelParams,
    cp: &CriticalPoint,
    setup: &ExpansionSetup,
    pair: &LinearEigenpair,
    w20: &Vec2,
    w22: &Vec2,
) -> (Vec2, Vec2, Vec2) {
    let (m, uc, k2, cc, mu) = (pair.m, p.u_c, cp.k_sq(), cp.chi_c, p.mu);
    let s = 2.0 * uc - 1.0;
    let g11 = Vec2::first_only(k2 * setup.chi2 * p.crowding() * pair.rho.second());
    let g13 = Vec2::first_only(
        cc * s * k2 * (w20[0] + m * w22[1] - 0.5 * w22[0])
            + 0.25 * cc * m * m * k2
            + mu * m / uc * (2.0 * w20[0] + w22[0]),
    );
    let g3 = Vec2::first_only(
        cc * s * k2 * (3.0 * m * w22[1] + 1.5 * w22[0]) + 0.75 * cc * m * m * k2 + mu / uc * m * w22[0],
    );
    (g11, g13, g3)
}

/// Solves the third, fourth and fifth order systems given the cubic coefficients.
pub(super) fn assemble(
    p: &ModelParams,
    cp: &CriticalPoint,
    setup: &ExpansionSetup,
    pair: &LinearEigenpair,
    second: &SecondOrder,
    sigma: f64,
    l_cubic: f64,
) -> Result<CorrectionVectors, AmplitudeError> {
    let (m, uc, k2, cc, mu) = (pair.m, p.u_c, cp.k_sq(), cp.chi_c, p.mu);
    let (chi2, chi4) = (setup.chi2, setup.chi4);
    let s = 2.0 * uc - 1.0;
    let cr = p.crowding();
    let rho = pair.rho;
    let (w20, w22) = (second.w20, second.w22);
    let (g11, g13, g3) = third_order_forcing(p, cp, setup, pair, &w20, &w22);
    let e1 = Vec2::first_only;
    // M_chi w = (chi u_c (1 - u_c) w2, 0)
    let m_chi = |chi: f64, w: &Vec2| e1(chi * cr * w[1]);

    let mut max_res: f64 = 0.0;
    let mut solve = |i: u32, rhs: Vec2, ctx: &'static str| -> Result<Vec2, AmplitudeError> {
        let x = solve_reduced_with(p, cp, pair, i, rhs, setup.kernel, ctx)?;
        max_res = max_res.max(solve_residual(&cp.operator(p, i), &x, &rhs));
        Ok(x)
    };

    let rhs31 = rho.scale(sigma) - g11;
    let rhs32 = g13 - rho.scale(l_cubic);
    let solvability_residual = [rhs31, rhs32]
        .iter()
        .map(|r| {
            let n = r.norm() * pair.psi.norm();
            if n == 0.0 {
                0.0
            } else {
                abs(r.dot(&pair.psi) / n)
            }
        })
        .fold(0.0, f64::max);
    let w31 = solve(1, rhs31, "W31 system")?;
    let w32 = solve(1, rhs32, "W32 system")?;
    let w33 = solve(3, g3, "W33 system")?;

    let h02 = e1(mu * m / uc * w31[0]);
    let h04 = e1(mu / uc * (sq(w20[0]) + w32[0] * m + 0.5 * sq(w22[0])));
    let h22 = m_chi(chi2, &w22).scale(-4.0 * k2)
        + e1(mu * m / uc * w31[0])
        + e1(s * k2 * (cc * w31[0] + cc * m * w31[1] + chi2 * m));
    let h24 = e1(cc * s * k2 * (w32[1] * m + 3.0 * w33[1] * m + w32[0])
        + cc * s * k2 * (4.0 * w20[0] * w22[1] - w33[0])
        + 2.0 * cc * k2 * (w22[1] * m * m + m * w20[0])
        + mu / uc * (2.0 * w20[0] * w22[0] + w32[0] * m + w33[0] * m));
    let h4 = e1(cc * s * k2 * (6.0 * w33[1] * m + 2.0 * w33[0] + 4.0 * w22[0] * w22[1])
        + 2.0 * cc * k2 * (w22[1] * m * m + m * w22[0])
        + mu / uc * (0.5 * sq(w22[0]) + w33[0] * m));

    let w40 = solve(0, w20.scale(2.0 * sigma) + h02, "W40 system")?;
    let w41 = solve(0, h04 - w20.scale(2.0 * l_cubic), "W41 system")?;
    let w42 = solve(2, w22.scale(2.0 * sigma) + h22, "W42 system")?;
    let w43 = solve(2, h24 - w22.scale(2.0 * l_cubic), "W43 system")?;
    let w44 = solve(4, h4, "W44 system")?;

    let p11 = (m_chi(chi2, &w31) + m_chi(chi4, &rho)).scale(k2);
    let p13 = m_chi(chi2, &w32).scale(-k2)
        + e1(s * cc * k2 * (w40[0] + w20[0] * w31[1] - 0.5 * w22[0] * w31[1])
            + s * cc * k2 * (w31[0] * w22[1] + w42[1] * m - 0.5 * w42[0])
            + s * chi2 * k2 * (w22[1] * m + w20[0] - 0.5 * w22[0])
            + 0.25 * cc * k2 * (2.0 * m * w31[0] + w31[1] * m * m)
            + 0.25 * chi2 * k2 * m * m
            + 2.0 * mu / uc * (w40[0] * m + 0.5 * w42[0] * m + w20[0] * w31[0] + 0.5 * w22[0] * w31[0]));
    let p15 = e1(s * cc * k2 * (w41[0] + w20[0] * w32[1] - 0.5 * w22[0] * w32[1] + w32[0] * w22[1])
        + s * cc * k2 * (1.5 * w22[0] * w33[1] - w33[0] * w22[1] + w43[1] * m - 0.5 * w43[0])
        + cc * k2
            * (0.5 * m * w32[0] - 0.5 * m * w33[0] + 2.0 * w20[0] * w22[1] * m + 0.25 * w32[1] * m * m)
        + cc * k2 * (0.75 * w33[1] * m * m + sq(w20[0]) + 0.5 * sq(w22[0]) - w20[0] * w22[0])
        + 2.0 * mu / uc
            * (w41[0] * m
                + 0.5 * w43[0] * m
                + w20[0] * w32[0]
                + 0.5 * w22[0] * w32[0]
                + 0.5 * w22[0] * w33[0]));

    Ok(CorrectionVectors {
        f0: second.f0,
        f2: second.f2,
        w20,
        w22,
        g11,
        g13,
        g3,
        w31,
        w32,
        w33,
        h02,
        h04,
        h22,
        h24,
        h4,
        w40,
        w41,
        w42,
        w43,
        w44,
        p11,
        p13,
        p15,
        solvability_residual,
        max_solve_residual: max_res,
    })
}
