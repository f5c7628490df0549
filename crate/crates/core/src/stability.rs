//! Linear stability of the uniform state.
//!
//! A perturbation `exp(λt) cos(kx)` grows according to
//! `λ² + g(k²) λ + h(k²) = 0` with
//!
//! ```text
//! g(k²) = k² (d1 + d2) + mu + beta
//! h(k²) = d1 d2 k⁴ + q k² + mu beta,   q = mu d2 + beta d1 - alpha chi u_c (1 - u_c)
//! ```
//!
//! Since `g > 0` there are no purely imaginary roots, so instability is always
//! of Turing type: it occurs exactly where `h(k²) < 0`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{monic_quadratic_roots, Eigenvalue};
use crate::math::{abs, fourth_root, sq, sqrt, PI};
use crate::params::ModelParams;

#[derive(Clone, Debug, PartialEq, Serialize, thiserror::Error)]
pub enum StabilityError {
    #[error("mu = 0: no finite k_c threshold; use chi_min")]
    NoFiniteThreshold,
    #[error("mu = 0: the critical wavenumber k_c is zero, there is no pattern formation")]
    ZeroCriticalWavenumber,
    #[error("expansion parameter must be a non-negative number, got {0}")]
    InvalidEps(f64),
}

/// Default absolute tolerance for root residuals.
pub const ROOT_TOL: f64 = 1e-10;

/// Trace term of the dispersion relation.
pub fn dispersion_g(k_sq: f64, p: &ModelParams) -> f64 {
    k_sq * (p.d1 + p.d2) + p.mu + p.beta
}

/// Linear coefficient `q` of `h(k²)` at the sensitivity stored in `p`.
pub fn q_linear(p: &ModelParams) -> f64 {
    p.mu * p.d2 + p.beta * p.d1 - p.alpha * p.chi * p.crowding()
}

/// Determinant term of the dispersion relation.
pub fn dispersion_h(k_sq: f64, p: &ModelParams) -> f64 {
    p.d1 * p.d2 * k_sq * k_sq + q_linear(p) * k_sq + p.mu * p.beta
}

/// `dh/d(k²)`.
pub fn dispersion_h_slope(k_sq: f64, p: &ModelParams) -> f64 {
    2.0 * p.d1 * p.d2 * k_sq + q_linear(p)
}

/// Minimum of `h` over real `k²`, attained at `k² = -q / (2 d1 d2)`.
pub fn h_min(p: &ModelParams) -> f64 {
    p.mu * p.beta - sq(q_linear(p)) / (4.0 * p.d1 * p.d2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRates {
    pub minus: Eigenvalue,
    pub plus: Eigenvalue,
}

/// Both roots of the dispersion relation, ordered by real part.
pub fn growth_rate(k_sq: f64, p: &ModelParams) -> GrowthRates {
    let (minus, plus) = monic_quadratic_roots(dispersion_g(k_sq, p), dispersion_h(k_sq, p));
    GrowthRates { minus, plus }
}

/// Real part of the leading eigenvalue `λ⁺(k²)`.
pub fn lambda_plus(k_sq: f64, p: &ModelParams) -> f64 {
    growth_rate(k_sq, p).plus.re
}

/// Critical sensitivity at which `h` first touches zero.
pub fn chi_c(p: &ModelParams) -> Result<f64, StabilityError> {
    if p.mu <= 0.0 {
        return Err(StabilityError::NoFiniteThreshold);
    }
    Ok((p.mu * p.d2 + p.beta * p.d1 + 2.0 * sqrt(p.d1 * p.d2 * p.mu * p.beta)) / (p.alpha * p.crowding()))
}

/// Squared critical wavenumber `sqrt(mu beta / (d1 d2))`.
pub fn k_c_sq(p: &ModelParams) -> Result<f64, StabilityError> {
    if p.mu <= 0.0 {
        return Err(StabilityError::ZeroCriticalWavenumber);
    }
    Ok(sqrt(p.mu * p.beta / (p.d1 * p.d2)))
}

pub fn k_c(p: &ModelParams) -> Result<f64, StabilityError> {
    if p.mu <= 0.0 {
        return Err(StabilityError::ZeroCriticalWavenumber);
    }
    Ok(fourth_root(p.mu * p.beta / (p.d1 * p.d2)))
}

/// Sensitivity at which the mode `k²` is neutral (`h(k²) = 0`).
pub fn neutral_chi(k_sq: f64, p: &ModelParams) -> f64 {
    (p.mu + p.d1 * k_sq) * (p.beta + p.d2 * k_sq) / (p.alpha * p.crowding() * k_sq)
}

/// Open interval `(k1_sq, k2_sq)` of squared wavenumbers with `h < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub k1_sq: f64,
    pub k2_sq: f64,
}

impl Band {
    pub fn contains(&self, k_sq: f64) -> bool {
        self.k1_sq < k_sq && k_sq < self.k2_sq
    }
}

/// Roots of `h(k²) = 0` when the uniform state is unstable or exactly critical.
pub fn unstable_band(p: &ModelParams) -> Option<Band> {
    unstable_band_with_tol(p, 1e-12)
}

/// As [`unstable_band`]; a discriminant within `rel_tol · q²` of zero is
/// treated as a double root.
pub fn unstable_band_with_tol(p: &ModelParams, rel_tol: f64) -> Option<Band> {
    let q = q_linear(p);
    if q >= 0.0 {
        return None;
    }
    let a = p.d1 * p.d2;
    let mut disc = q * q - 4.0 * a * p.mu * p.beta;
    if disc < 0.0 {
        if -disc <= rel_tol * q * q {
            disc = 0.0;
        } else {
            return None;
        }
    }
    // q < 0, so the larger root has no cancellation; the smaller follows from
    // the product of the roots.
    let k2_sq = (-q + sqrt(disc)) / (2.0 * a);
    let k1_sq = p.mu * p.beta / (a * k2_sq);
    Some(Band { k1_sq, k2_sq })
}

/// A Neumann eigenmode `cos(n pi x / l)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub n: u32,
    pub k: f64,
}

pub fn mode_wavenumber(n: u32, domain_length: f64) -> f64 {
    n as f64 * PI / domain_length
}

/// Every Neumann mode strictly inside the unstable band.
pub fn admissible_unstable_modes(p: &ModelParams) -> Vec<Mode> {
    let Some(band) = unstable_band(p) else {
        return Vec::new();
    };
    let step = PI / p.domain_length;
    let first = (sqrt(band.k1_sq) / step) as u32;
    let last = (sqrt(band.k2_sq) / step) as u32 + 1;
    (first.max(1)..=last)
        .map(|n| Mode { n, k: mode_wavenumber(n, p.domain_length) })
        .filter(|m| band.contains(m.k * m.k))
        .collect()
}

/// First bifurcation value over the discrete Neumann modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiMin {
    pub chi_min: f64,
    pub n0: u32,
    /// `n0 pi / l`.
    pub k: f64,
    /// With `mu = 0` the neutral curve increases in `k²`; this is its
    /// infimum as `k → 0`, which no Neumann mode attains.
    pub zero_growth_infimum: Option<f64>,
}

const MAX_MODE_SCAN: u32 = 1_000_000;

/// Minimizes the neutral sensitivity over `k = n pi / l`, `n ≥ 1`.
pub fn chi_min(p: &ModelParams) -> ChiMin {
    let l = p.domain_length;
    let kc_sq = k_c_sq(p).unwrap_or(0.0);
    let mut best = ChiMin { chi_min: f64::INFINITY, n0: 0, k: 0.0, zero_growth_infimum: None };
    let mut prev = f64::INFINITY;
    let mut rises = 0;
    for n in 1..=MAX_MODE_SCAN {
        let k = mode_wavenumber(n, l);
        let chi = neutral_chi(k * k, p);
        if chi < best.chi_min {
            best.chi_min = chi;
            best.n0 = n;
            best.k = k;
        }
        rises = if chi > prev { rises + 1 } else { 0 };
        prev = chi;
        // The neutral curve is unimodal in k² with its minimum at k_c².
        if rises >= 2 && k * k > 4.0 * kc_sq {
            break;
        }
    }
    if p.mu <= 0.0 {
        best.zero_growth_infimum = Some(p.d1 * p.beta / (p.alpha * p.crowding()));
    }
    best
}

/// Coefficients of the quadratic whose root gives the most unstable mode at
/// `chi = chi_c (1 + eps²)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// The `q` of the shift formula, written in terms of `eps`. It is kept
    /// separate from [`q_linear`] even though both describe the same quantity.
    pub q_shift: f64,
    /// Expected sign conditions (`A < 0`, `B < 0`, `C > 0`) that failed.
    pub violations: Vec<&'static str>,
}

pub fn shift_coefficients(p: &ModelParams, eps: f64) -> ShiftCoefficients {
    let (d1, d2, mu, beta) = (p.d1, p.d2, p.mu, p.beta);
    let e2 = eps * eps;
    let q_shift = -e2 * (mu * d2 + beta * d1) - 2.0 * (1.0 + e2) * sqrt(mu * beta * d1 * d2);
    let a = -sq(d1 - d2) * d1 * d2;
    let b = 4.0 * d1 * d2 * q_shift - 2.0 * d1 * d2 * (d1 + d2) * (mu + beta);
    let c = sq(q_shift) - (d1 + d2) * (mu + beta) * q_shift + sq(d1 + d2) * mu * beta;
    let mut violations = Vec::new();
    if !(a < 0.0) {
        violations.push("A < 0");
    }
    if !(b < 0.0) {
        violations.push("B < 0");
    }
    if !(c > 0.0) {
        violations.push("C > 0");
    }
    ShiftCoefficients { a, b, c, q_shift, violations }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMethod {
    ClosedForm,
    DirectMaximization,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MostUnstable {
    pub k_m_sq: f64,
    /// `k_m² - k_c²`.
    pub delta: f64,
    pub method: ShiftMethod,
    pub shift: Option<ShiftCoefficients>,
    /// `|dλ⁺/d(k²)| / (d1 + d2)` at `k_m²` by central differences.
    pub derivative_residual: f64,
}

/// Wavenumber maximizing `λ⁺` at `chi = chi_c (1 + eps²)`; `p.chi` is ignored.
pub fn most_unstable_mode(p: &ModelParams, eps: f64) -> Result<MostUnstable, StabilityError> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(StabilityError::InvalidEps(eps));
    }
    let chi = chi_c(p)? * (1.0 + eps * eps);
    let kc_sq = k_c_sq(p)?;
    let at = p.with_chi(chi);

    let (k_m_sq, method, shift) = if p.d1 != p.d2 {
        let s = shift_coefficients(p, eps);
        let k_m_sq = (-s.b - sqrt(s.b * s.b - 4.0 * s.a * s.c)) / (2.0 * s.a);
        (k_m_sq, ShiftMethod::ClosedForm, Some(s))
    } else {
        let k_m_sq = match unstable_band(&at) {
            Some(band) if band.k2_sq > band.k1_sq => {
                golden_max(|x| lambda_plus(x, &at), band.k1_sq, band.k2_sq)
            }
            _ => kc_sq,
        };
        (k_m_sq, ShiftMethod::DirectMaximization, None)
    };

    let h = 1e-5 * k_m_sq;
    let slope = (lambda_plus(k_m_sq + h, &at) - lambda_plus(k_m_sq - h, &at)) / (2.0 * h);
    Ok(MostUnstable {
        k_m_sq,
        delta: k_m_sq - kc_sq,
        method,
        shift,
        derivative_residual: abs(slope) / (p.d1 + p.d2),
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Summary of the linear analysis at the sensitivity stored in the parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersionReport {
    pub chi: f64,
    pub chi_c: Option<f64>,
    pub k_c_sq: Option<f64>,
    pub q: f64,
    pub h_min: f64,
    pub band: Option<Band>,
    pub admissible_modes: Vec<Mode>,
    pub chi_min: f64,
    pub n0: u32,
    pub eps: Option<f64>,
    pub most_unstable: Option<MostUnstable>,
    /// Growth rate of each admissible mode, same order as `admissible_modes`.
    pub growth_rates: Vec<f64>,
}

pub fn dispersion_report(p: &ModelParams, eps: Option<f64>) -> Result<DispersionReport, StabilityError> {
    let cm = chi_min(p);
    let admissible_modes = admissible_unstable_modes(p);
    let growth_rates = admissible_modes.iter().map(|m| lambda_plus(m.k * m.k, p)).collect();
    let most_unstable = match eps {
        Some(e) if p.mu > 0.0 => Some(most_unstable_mode(p, e)?),
        Some(e) if !(e >= 0.0) => return Err(StabilityError::InvalidEps(e)),
        _ => None,
    };
    Ok(DispersionReport {
        chi: p.chi,
        chi_c: chi_c(p).ok(),
        k_c_sq: k_c_sq(p).ok(),
        q: q_linear(p),
        h_min: h_min(p),
        band: unstable_band(p),
        admissible_modes,
        chi_min: cm.chi_min,
        n0: cm.n0,
        eps,
        most_unstable,
        growth_rates,
    })
}

/// One row of the dispersion curve export.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionSample {
    pub k_sq: f64,
    pub g: f64,
    pub h: f64,
    pub re_lambda_plus: f64,
}

/// Samples `g`, `h` and `Re λ⁺` on `samples` evenly spaced points of `[0, k_sq_max]`.
pub fn dispersion_curve(p: &ModelParams, k_sq_max: f64, samples: usize) -> Vec<DispersionSample> {
    let n = samples.max(2);
    (0..n)
        .map(|i| {
            let k_sq = k_sq_max * i as f64 / (n - 1) as f64;
            DispersionSample {
                k_sq,
                g: dispersion_g(k_sq, p),
                h: dispersion_h(k_sq, p),
                re_lambda_plus: lambda_plus(k_sq, p),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{fig2, fig3};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn g_at_zero_wavenumber() {
        assert!((dispersion_g(0.0, &fig2()) - 34.5).abs() < 1e-14);
        assert!((dispersion_g(0.0, &fig3()) - 10.5).abs() < 1e-14);
        let p = fig2();
        assert!(dispersion_g(2.0, &p) > dispersion_g(1.0, &p));
    }

    #[test]
    fn h_at_zero_is_det_k() {
        assert!((dispersion_h(0.0, &fig2()) - 17.0).abs() < 1e-13);
        assert!((dispersion_h(0.0, &fig3().with_chi(5.0)) - 5.0).abs() < 1e-13);
    }

    #[test]
    fn tangency_at_threshold() {
        for base in [fig2(), fig3()] {
            let p = base.with_chi(chi_c(&base).unwrap());
            let kc2 = k_c_sq(&p).unwrap();
            assert!(dispersion_h(kc2, &p).abs() < 1e-9);
            assert!(dispersion_h_slope(kc2, &p).abs() < 1e-9);
            let vertex = -q_linear(&p) / (2.0 * p.d1 * p.d2);
            assert!(rel(vertex, kc2) < 1e-12);
            assert!(dispersion_h(vertex, &p).abs() < 1e-9);
            assert!(h_min(&p).abs() < 1e-9);
        }
    }

    #[test]
    fn h_min_identity() {
        for chi in [0.5, 1.7, 2.9, 6.0] {
            let p = fig2().with_chi(chi);
            let vertex = -q_linear(&p) / (2.0 * p.d1 * p.d2);
            let direct = dispersion_h(vertex, &p);
            assert!(rel(direct, h_min(&p)) < 1e-12, "chi = {chi}");
        }
    }

    #[test]
    fn growth_rate_special_cases() {
        let p = fig2().with_chi(1.0);
        let r = growth_rate(0.0, &p);
        assert!((r.minus.re + 34.0).abs() < 1e-12 && (r.plus.re + 0.5).abs() < 1e-12);

        let p = fig3().with_chi(chi_c(&fig3()).unwrap());
        let r = growth_rate(k_c_sq(&p).unwrap(), &p);
        assert!(r.plus.re.abs() < 1e-9);

        let p = fig3().with_chi(2.0);
        for i in 0..200 {
            let r = growth_rate(i as f64 * 0.1, &p);
            assert!(r.plus.re < 0.0 && r.minus.re < 0.0);
            // g > 0 rules out a purely imaginary pair.
            assert!(!(r.plus.re == 0.0 && r.plus.im != 0.0));
        }
    }

    #[test]
    fn thresholds_match_reported_values() {
        assert!((chi_c(&fig2()).unwrap() - 1.7286).abs() < 1e-4);
        assert!((k_c(&fig2()).unwrap() - 3.45).abs() < 0.01);
        assert!((chi_c(&fig3()).unwrap() - 2.3798).abs() < 1e-4);
        assert!((k_c(&fig3()).unwrap() - 2.0205).abs() < 1e-3);

        let unit = ModelParams {
            d1: 1.0,
            d2: 1.0,
            chi: 0.0,
            mu: 1.0,
            u_c: 0.5,
            alpha: 4.0,
            beta: 1.0,
            domain_length: 1.0,
        };
        assert!((chi_c(&unit).unwrap() - 4.0).abs() < 1e-14);
        assert!((k_c(&unit).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_growth_has_no_threshold() {
        let p = fig2().with_mu(0.0);
        assert_eq!(chi_c(&p), Err(StabilityError::NoFiniteThreshold));
        assert_eq!(k_c(&p), Err(StabilityError::ZeroCriticalWavenumber));
        let cm = chi_min(&p);
        assert_eq!(cm.n0, 1);
        let inf = cm.zero_growth_infimum.unwrap();
        assert!(cm.chi_min > inf);
    }

    #[test]
    fn band_edges() {
        let base = fig2();
        let cc = chi_c(&base).unwrap();
        let band = unstable_band(&base.with_chi(cc)).expect("degenerate band");
        let kc2 = k_c_sq(&base).unwrap();
        // A double root splits by O(sqrt(machine eps)) under rounding.
        assert!(rel(band.k1_sq, kc2) < 1e-7 && rel(band.k2_sq, kc2) < 1e-7);

        assert!(unstable_band(&base.with_chi(0.99 * cc)).is_none());

        let p = base.with_chi(cc * (1.0 + 0.16));
        let band = unstable_band(&p).unwrap();
        assert!(band.contains(4.1105f64 * 4.1105));
        assert!(band.k1_sq < kc2 && kc2 < band.k2_sq);
        let scale = p.mu * p.beta;
        assert!(dispersion_h(band.k1_sq, &p).abs() < 1e-9 * scale);
        assert!(dispersion_h(band.k2_sq, &p).abs() < 1e-9 * scale);
    }

    #[test]
    fn admissible_modes_for_reference_cases() {
        let base = fig2();
        let cc = chi_c(&base).unwrap();
        let near = admissible_unstable_modes(&base.with_chi(chi_min(&base).chi_min * 1.0001));
        assert!(near.iter().any(|m| m.n == 7 && (m.k - 3.5).abs() < 1e-12));

        let wide = admissible_unstable_modes(&base.with_chi(cc * 1.16));
        assert!(wide.iter().any(|m| m.n == 7));
        assert!(wide.iter().any(|m| m.n == 8 && (m.k - 4.0).abs() < 1e-12));

        assert!(admissible_unstable_modes(&base.with_chi(0.5 * cc)).is_empty());
    }

    #[test]
    fn chi_min_scan() {
        let p = fig2();
        let cm = chi_min(&p);
        assert_eq!(cm.n0, 7);
        assert!((cm.k - 3.5).abs() < 1e-12);
        assert!(cm.chi_min >= chi_c(&p).unwrap());
        // brute force over a generous window
        let brute = (1..400u32)
            .map(|n| neutral_chi(sq(mode_wavenumber(n, p.domain_length)), &p))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(brute, cm.chi_min);

        // Domain sized so that k_c is exactly the fifth mode.
        let kc = k_c(&p).unwrap();
        let tuned = ModelParams { domain_length: 5.0 * PI / kc, ..p };
        let cm = chi_min(&tuned);
        assert_eq!(cm.n0, 5);
        assert!(rel(cm.chi_min, chi_c(&tuned).unwrap()) < 1e-12);
    }

    #[test]
    fn most_unstable_mode_shift() {
        let p = fig2();
        let m0 = most_unstable_mode(&p, 0.0).unwrap();
        assert!(m0.delta.abs() < 1e-9);

        let m = most_unstable_mode(&p, 0.4).unwrap();
        assert!((sqrt(m.k_m_sq) - 4.1105).abs() < 1e-3);
        assert!(m.derivative_residual < 1e-6);
        assert!(m.shift.as_ref().unwrap().violations.is_empty());

        let mut last = 0.0;
        for i in 1..20 {
            let d = most_unstable_mode(&p, 0.05 * i as f64).unwrap().delta;
            assert!(d > last);
            last = d;
        }
    }

    #[test]
    fn most_unstable_mode_maximizes_growth() {
        let p = fig2();
        let eps = 0.4;
        let m = most_unstable_mode(&p, eps).unwrap();
        let at = p.with_chi(chi_c(&p).unwrap() * (1.0 + eps * eps));
        let band = unstable_band(&at).unwrap();
        let best = lambda_plus(m.k_m_sq, &at);
        for i in 0..=1000 {
            let k_sq = band.k1_sq + (band.k2_sq - band.k1_sq) * i as f64 / 1000.0;
            assert!(lambda_plus(k_sq, &at) <= best + 1e-12);
        }
    }

    #[test]
    fn equal_diffusivities_fall_back_to_direct_search() {
        let p = ModelParams { d1: 0.5, d2: 0.5, ..fig2() };
        let m = most_unstable_mode(&p, 0.3).unwrap();
        assert_eq!(m.method, ShiftMethod::DirectMaximization);
        assert!(m.derivative_residual < 1e-6);
        assert!(m.delta > 0.0);
    }

    #[test]
    fn negative_eps_is_rejected() {
        assert!(matches!(most_unstable_mode(&fig2(), -0.1), Err(StabilityError::InvalidEps(_))));
    }
}
