//! Critical point, kernel and adjoint vectors, and the reduced 2×2 solves.

use serde::{Deserialize, Serialize};

use super::{AmplitudeError, RESONANCE_TOL, SOLVABILITY_TOL};
use crate::linalg::{Mat2, Vec2};
use crate::math::{abs, sq, sqrt};
use crate::params::ModelParams;
use crate::stability;

/// Which wavenumber the expansion is built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    /// `k_c` and `chi_c` of the continuous problem.
    Continuous,
    /// The minimizing Neumann mode `n0 pi / l` and its threshold `chi_min`.
    FirstAdmissible,
}

/// Base point `(chi_c, k)` of the expansion. With [`ModeChoice::FirstAdmissible`]
/// `chi_c` holds `chi_min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub choice: ModeChoice,
    pub chi_c: f64,
    pub k: f64,
    /// Mode index when the wavenumber is a Neumann mode.
    pub n: Option<u32>,
}

impl CriticalPoint {
    pub fn new(p: &ModelParams, choice: ModeChoice) -> Result<Self, AmplitudeError> {
        match choice {
            ModeChoice::Continuous => Self::continuous(p),
            ModeChoice::FirstAdmissible => Ok(Self::first_admissible(p)),
        }
    }

    pub fn continuous(p: &ModelParams) -> Result<Self, AmplitudeError> {
        Ok(CriticalPoint {
            choice: ModeChoice::Continuous,
            chi_c: stability::chi_c(p)?,
            k: stability::k_c(p)?,
            n: None,
        })
    }

    pub fn first_admissible(p: &ModelParams) -> Self {
        let cm = stability::chi_min(p);
        CriticalPoint { choice: ModeChoice::FirstAdmissible, chi_c: cm.chi_min, k: cm.k, n: Some(cm.n0) }
    }

    #[inline]
    pub fn k_sq(&self) -> f64 {
        self.k * self.k
    }

    /// `L_i = K - i² k² D^{chi_c}`.
    pub fn operator(&self, p: &ModelParams, i: u32) -> Mat2 {
        p.mode_operator(sq(i as f64) * self.k_sq(), self.chi_c)
    }
}

/// Kernel vector `rho = (M, 1)` of `L_1` and adjoint kernel vector `psi = (M*, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearEigenpair {
    pub k: f64,
    pub m: f64,
    pub rho: Vec2,
    pub m_star: f64,
    pub psi: Vec2,
}

pub fn eigenpair(p: &ModelParams, k: f64) -> LinearEigenpair {
    let k_sq = k * k;
    let m = (p.beta + k_sq * p.d2) / p.alpha;
    let m_star = p.alpha / (p.mu + p.d1 * k_sq);
    LinearEigenpair { k, m, rho: Vec2::new(m, 1.0), m_star, psi: Vec2::new(m_star, 1.0) }
}

impl LinearEigenpair {
    /// Same pair with `psi` multiplied by `s`. Every coefficient is a ratio
    /// of inner products with `psi`, so results must not change.
    pub fn rescaled_adjoint(&self, s: f64) -> LinearEigenpair {
        LinearEigenpair { psi: self.psi.scale(s), ..*self }
    }

    /// `(|L_1 rho|, |L_1ᵀ psi|)` at sensitivity `chi`.
    pub fn nullity(&self, p: &ModelParams, chi: f64) -> (f64, f64) {
        let l1 = p.mode_operator(self.k * self.k, chi);
        (l1.mul_vec(&self.rho).norm(), l1.transpose().mul_vec(&self.psi).norm())
    }
}

/// How the free kernel component of the singular `i = 1` solves is fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelGauge {
    /// No component along `rho` (orthogonal to it).
    #[default]
    OrthogonalToRho,
    /// First component zero.
    ZeroFirst,
    /// Second component zero.
    ZeroSecond,
    /// Orthogonal to `psi`.
    OrthogonalToPsi,
}

/// Expansion of the sensitivity in the small parameter.
///
/// `eps_sq` may be negative: it then parametrizes `chi < chi_c` through
/// `chi = chi_c (1 + eps_sq)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSetup {
    pub eps_sq: f64,
    pub chi2: f64,
    pub chi4: f64,
    #[serde(default)]
    pub kernel: KernelGauge,
}

impl ExpansionSetup {
    /// `chi2 = chi_c`, `chi4 = 0`, so that `chi = chi_c (1 + eps²)`.
    pub fn from_eps(eps: f64, cp: &CriticalPoint) -> Self {
        ExpansionSetup { eps_sq: eps * eps, chi2: cp.chi_c, chi4: 0.0, kernel: KernelGauge::default() }
    }

    /// Inverse of [`ExpansionSetup::from_eps`]; below threshold `eps_sq < 0`.
    pub fn from_chi(chi: f64, cp: &CriticalPoint) -> Self {
        ExpansionSetup {
            eps_sq: chi / cp.chi_c - 1.0,
            chi2: cp.chi_c,
            chi4: 0.0,
            kernel: KernelGauge::default(),
        }
    }

    pub fn with_kernel(self, kernel: KernelGauge) -> Self {
        ExpansionSetup { kernel, ..self }
    }

    pub fn eps(&self) -> Option<f64> {
        (self.eps_sq >= 0.0).then(|| sqrt(self.eps_sq))
    }

    pub fn chi_effective(&self, chi_c: f64) -> f64 {
        chi_c + self.eps_sq * self.chi2 + self.eps_sq * self.eps_sq * self.chi4
    }
}

/// Solves `L_i x = rhs` with the default kernel gauge.
pub fn solve_reduced(
    p: &ModelParams,
    cp: &CriticalPoint,
    pair: &LinearEigenpair,
    i: u32,
    rhs: Vec2,
) -> Result<Vec2, AmplitudeError> {
    solve_reduced_with(p, cp, pair, i, rhs, KernelGauge::OrthogonalToRho, "solve_reduced")
}

/// Solves `L_i x = rhs`. For `i = 1` the system is singular: `rhs` must be
/// orthogonal to `psi`, and the particular solution is fixed by `gauge`.
pub fn solve_reduced_with(
    p: &ModelParams,
    cp: &CriticalPoint,
    pair: &LinearEigenpair,
    i: u32,
    rhs: Vec2,
    gauge: KernelGauge,
    context: &'static str,
) -> Result<Vec2, AmplitudeError> {
    let l = cp.operator(p, i);
    if i != 1 {
        return l.solve(&rhs, RESONANCE_TOL).ok_or(if i == 2 {
            AmplitudeError::ResonantSecondHarmonic { det: l.det() }
        } else {
            AmplitudeError::Resonance { harmonic: i, det: l.det() }
        });
    }

    let rn = rhs.norm();
    if rn == 0.0 {
        return Ok(Vec2::ZERO);
    }
    let residual = abs(rhs.dot(&pair.psi)) / (rn * pair.psi.norm());
    if !(residual <= SOLVABILITY_TOL) {
        return Err(AmplitudeError::Solvability { context, residual });
    }
    // Rank one: use the dominant row and look for x along rho⊥.
    let r = if l.row(0).norm() >= l.row(1).norm() { 0 } else { 1 };
    let perp = Vec2::new(1.0, -pair.m);
    let x = perp.scale(rhs[r] / l.row(r).dot(&perp));
    let rho = pair.rho;
    Ok(match gauge {
        KernelGauge::OrthogonalToRho => x,
        KernelGauge::ZeroFirst => x - rho.scale(x.first() / rho.first()),
        KernelGauge::ZeroSecond => x - rho.scale(x.second()),
        KernelGauge::OrthogonalToPsi => x - rho.scale(x.dot(&pair.psi) / rho.dot(&pair.psi)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{fig2, fig3};

    #[test]
    fn eigenpair_closed_forms() {
        let p = fig3();
        let cp = CriticalPoint::continuous(&p).unwrap();
        let pair = eigenpair(&p, cp.k);
        assert!((pair.m - 1.40825).abs() < 1e-4);

        let pair = eigenpair(&fig2(), 3.5);
        assert!((pair.m - (34.0 + 12.25 * 0.6) / 36.0).abs() < 1e-15);

        // beta + k² d2 = alpha
        let p = ModelParams { alpha: 34.0 + 0.6 * 4.0, ..fig2() };
        assert!((eigenpair(&p, 2.0).m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_and_adjoint_nullity() {
        for p in [fig2(), fig3()] {
            for choice in [ModeChoice::Continuous, ModeChoice::FirstAdmissible] {
                let cp = CriticalPoint::new(&p, choice).unwrap();
                let pair = eigenpair(&p, cp.k);
                let (a, b) = pair.nullity(&p, cp.chi_c);
                assert!(a < 1e-10 && b < 1e-10, "{choice:?}: {a:e} {b:e}");
            }
        }
    }

    #[test]
    fn reduced_solves() {
        let p = fig3();
        let cp = CriticalPoint::continuous(&p).unwrap();
        let pair = eigenpair(&p, cp.k);

        let x = solve_reduced(&p, &cp, &pair, 0, Vec2::new(1.0, 2.0)).unwrap();
        let back = p.kinetics().mul_vec(&x);
        assert!((back - Vec2::new(1.0, 2.0)).norm() < 1e-14);

        assert_eq!(solve_reduced(&p, &cp, &pair, 1, Vec2::ZERO).unwrap(), Vec2::ZERO);

        // rhs orthogonal to psi
        let rhs = Vec2::new(1.0, -pair.m_star);
        let x = solve_reduced(&p, &cp, &pair, 1, rhs).unwrap();
        assert!((cp.operator(&p, 1).mul_vec(&x) - rhs).norm() < 1e-12);
        assert!(x.dot(&pair.rho).abs() < 1e-14);

        for gauge in [KernelGauge::ZeroFirst, KernelGauge::ZeroSecond, KernelGauge::OrthogonalToPsi] {
            let y = solve_reduced_with(&p, &cp, &pair, 1, rhs, gauge, "test").unwrap();
            assert!((cp.operator(&p, 1).mul_vec(&y) - rhs).norm() < 1e-12);
        }

        let err = solve_reduced(&p, &cp, &pair, 1, Vec2::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, AmplitudeError::Solvability { .. }));
    }

    #[test]
    fn eps_chi_round_trip() {
        let cp = CriticalPoint::continuous(&fig3()).unwrap();
        let s = ExpansionSetup::from_eps(0.1, &cp);
        let chi = s.chi_effective(cp.chi_c);
        assert!((chi - cp.chi_c * 1.01).abs() < 1e-14);
        let back = ExpansionSetup::from_chi(chi, &cp);
        assert!((back.eps().unwrap() - 0.1).abs() < 1e-12);
        assert!(ExpansionSetup::from_chi(0.99 * cp.chi_c, &cp).eps().is_none());
    }

    #[test]
    fn zero_growth_has_only_discrete_base() {
        let p = fig2().with_mu(0.0);
        assert!(CriticalPoint::continuous(&p).is_err());
        let cp = CriticalPoint::first_admissible(&p);
        assert_eq!(cp.n, Some(1));
    }
}
