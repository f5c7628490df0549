//! Saddle-node location and bifurcation branches of the amplitude equation.
//!
//! Branches are reported in the physical amplitude `a = eps A`, the
//! coefficient of `rho cos(kx)` in `u - u_c`. In that variable the
//! equilibrium condition
//!
//! ```text
//! Q_tilde a⁴ - L_bar a² + eps² sigma_bar = 0
//! ```
//!
//! stays meaningful below threshold, where `eps² = chi / chi_c - 1 < 0`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::landau::{amplitude_equilibria, Criticality, LandauCoefficients};
use super::AmplitudeError;
use crate::math::sqrt;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantSample {
    pub chi: f64,
    pub discriminant: f64,
}

/// `L_bar² - 4 eps² sigma_bar Q_tilde`, which has the sign of
/// `L_bar² - 4 sigma_bar Q_bar` for `eps² > 0` and extends it below threshold.
pub fn saddle_node_discriminant(c: &LandauCoefficients, eps_sq: f64) -> f64 {
    let b = c.bars(eps_sq);
    b.l_bar * b.l_bar - 4.0 * eps_sq * b.sigma_bar * c.q_tilde
}

const SCAN_STEPS: usize = 400;

/// Saddle-node value `chi_s < chi_c` where the two nonzero branches merge.
pub fn chi_s(c: &LandauCoefficients) -> Result<f64, AmplitudeError> {
    let chi_c = c.critical.chi_c;
    let disc = |chi: f64| saddle_node_discriminant(c, chi / chi_c - 1.0);
    let lo = 0.9 * chi_c;
    let mut scan = Vec::with_capacity(SCAN_STEPS + 1);
    if c.l_cubic >= 0.0 || c.q_tilde >= 0.0 {
        scan.push(DiscriminantSample { chi: chi_c, discriminant: disc(chi_c) });
        return Err(AmplitudeError::ChiSNotFound {
            reason: "not subcritical (needs L < 0 and Q_tilde < 0)",
            scan,
        });
    }
    // March down from chi_c and bisect the first sign change.
    let mut hi = chi_c;
    let mut d_hi = disc(hi);
    scan.push(DiscriminantSample { chi: hi, discriminant: d_hi });
    for i in 1..=SCAN_STEPS {
        let chi = chi_c - (chi_c - lo) * i as f64 / SCAN_STEPS as f64;
        let d = disc(chi);
        scan.push(DiscriminantSample { chi, discriminant: d });
        if (d > 0.0) != (d_hi > 0.0) {
            let (mut a, mut b) = (chi, hi);
            let d_a = d;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let dm = disc(mid);
                if (dm > 0.0) == (d_a > 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        hi = chi;
        d_hi = d;
    }
    Err(AmplitudeError::ChiSNotFound { reason: "discriminant keeps its sign on (0.9 chi_c, chi_c)", scan })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchKind {
    Trivial,
    /// Small-amplitude nonzero branch.
    Lower,
    /// Large-amplitude nonzero branch.
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub chi: f64,
    /// Physical amplitude `a = eps A`.
    pub amplitude: f64,
    pub stable: bool,
    pub branch: BranchKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BifurcationReport {
    pub chi_c: f64,
    pub chi_s: Option<f64>,
    pub criticality: Criticality,
    /// `(chi_s, chi_c)` when both the uniform state and a pattern are stable.
    pub coexistence: Option<(f64, f64)>,
    pub points: Vec<BranchPoint>,
}

/// Samples every nonnegative equilibrium on `samples` evenly spaced values of
/// `chi` in `[chi_lo, chi_hi]`.
///
/// In the supercritical regime only the cubic truncation is used, giving the
/// single forward branch `a² = eps² sigma / L`.
pub fn bifurcation_branches(
    c: &LandauCoefficients,
    chi_lo: f64,
    chi_hi: f64,
    samples: usize,
) -> BifurcationReport {
    let chi_c = c.critical.chi_c;
    let n = samples.max(2);
    let mut points = Vec::new();
    for i in 0..n {
        let chi = chi_lo + (chi_hi - chi_lo) * i as f64 / (n - 1) as f64;
        let e2 = chi / chi_c - 1.0;
        let b = c.bars(e2);
        let trivial_stable = e2 * b.sigma_bar < 0.0;
        points.push(BranchPoint { chi, amplitude: 0.0, stable: trivial_stable, branch: BranchKind::Trivial });
        match c.criticality {
            Criticality::Supercritical => {
                let r = e2 * c.sigma / c.l_cubic;
                if r > 0.0 {
                    points.push(BranchPoint {
                        chi,
                        amplitude: sqrt(r),
                        stable: true,
                        branch: BranchKind::Upper,
                    });
                }
            }
            Criticality::Subcritical => {
                let eq = amplitude_equilibria(e2 * b.sigma_bar, b.l_bar, c.q_tilde);
                let last = eq.len().saturating_sub(1);
                for (j, e) in eq.iter().enumerate() {
                    let branch = if j == last { BranchKind::Upper } else { BranchKind::Lower };
                    points.push(BranchPoint { chi, amplitude: e.amplitude, stable: e.stable, branch });
                }
            }
        }
    }
    let chi_s = match c.criticality {
        Criticality::Subcritical => chi_s(c).ok(),
        Criticality::Supercritical => None,
    };
    BifurcationReport {
        chi_c,
        chi_s,
        criticality: c.criticality,
        coexistence: chi_s.map(|s| (s, chi_c)),
        points,
    }
}
