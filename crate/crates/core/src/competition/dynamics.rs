//! Equilibria, trajectories and basins of the two-mode amplitude system.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{CompetitionCoefficients, CompetitionError};
use crate::linalg::{Eigenvalue, Mat2, Vec2};
use crate::math::{abs, pow, sqrt};

/// Eigenvalues closer than this to the imaginary axis make a point degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumClass {
    StableNode,
    UnstableNode,
    Saddle,
    StableFocus,
    UnstableFocus,
    Degenerate,
}

impl EquilibriumClass {
    pub fn classify(eig: (Eigenvalue, Eigenvalue)) -> Self {
        let (a, b) = eig;
        if abs(a.re) < DEGENERACY_TOL || abs(b.re) < DEGENERACY_TOL {
            return EquilibriumClass::Degenerate;
        }
        let complex = !a.is_real();
        match (a.re < 0.0, b.re < 0.0, complex) {
            (true, true, false) => EquilibriumClass::StableNode,
            (false, false, false) => EquilibriumClass::UnstableNode,
            (true, true, true) => EquilibriumClass::StableFocus,
            (false, false, true) => EquilibriumClass::UnstableFocus,
            _ => EquilibriumClass::Saddle,
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, EquilibriumClass::StableNode | EquilibriumClass::StableFocus)
    }
}

/// Which modes are active at an equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasinLabel {
    Trivial,
    ModeOne,
    ModeTwo,
    Mixed,
    /// No equilibrium was reached within the horizon.
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub a1: f64,
    pub a2: f64,
    pub label: BasinLabel,
    pub jacobian: Mat2,
    pub eigenvalues: (Eigenvalue, Eigenvalue),
    pub class: EquilibriumClass,
}

/// Non-negative equilibria ordered as `(0,0)`, `(A1*,0)`, `(0,A2*)`, interior.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub points: Vec<EquilibriumPoint>,
}

impl EquilibriumSet {
    pub fn find(&self, label: BasinLabel) -> Option<&EquilibriumPoint> {
        self.points.iter().find(|e| e.label == label)
    }
}

fn point(cc: &CompetitionCoefficients, a1: f64, a2: f64, label: BasinLabel) -> EquilibriumPoint {
    let jacobian = cc.jacobian([a1, a2]);
    let eigenvalues = jacobian.eigenvalues();
    EquilibriumPoint { a1, a2, label, jacobian, eigenvalues, class: EquilibriumClass::classify(eigenvalues) }
}

/// All equilibria in the closed first quadrant.
pub fn equilibria(cc: &CompetitionCoefficients) -> EquilibriumSet {
    let mut points = Vec::with_capacity(4);
    points.push(point(cc, 0.0, 0.0, BasinLabel::Trivial));
    if cc.sigma1 / cc.l1 > 0.0 {
        points.push(point(cc, sqrt(cc.sigma1 / cc.l1), 0.0, BasinLabel::ModeOne));
    }
    if cc.sigma2 / cc.l2 > 0.0 {
        points.push(point(cc, 0.0, sqrt(cc.sigma2 / cc.l2), BasinLabel::ModeTwo));
    }
    // Squares X = A² solve [L1 Omega1; Omega2 L2] X = sigma.
    let m = Mat2::new(cc.l1, cc.omega1, cc.omega2, cc.l2);
    if let Some(x) = m.solve(&Vec2::new(cc.sigma1, cc.sigma2), 1e-12) {
        if x[0] > 0.0 && x[1] > 0.0 {
            points.push(point(cc, sqrt(x[0]), sqrt(x[1]), BasinLabel::Mixed));
        }
    }
    EquilibriumSet { points }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub t_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    /// Upper bound on the step, keeping the explicit pair well inside its
    /// stability region so trajectories settle onto stable equilibria.
    pub max_step: f64,
    /// Stop once `|f(A)|` drops below this.
    pub stationary_tol: f64,
    /// Report divergence once `|A|` exceeds this.
    pub blowup: f64,
    /// Distance within which the final state is attributed to an equilibrium.
    pub attractor_radius: f64,
    /// Keep every accepted step when true, otherwise only the endpoints.
    pub record: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            t_max: 1e4,
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: 1e-3,
            max_step: 0.1,
            stationary_tol: 1e-10,
            blowup: 1e3,
            attractor_radius: 1e-4,
            record: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub end: [f64; 2],
    pub t_end: f64,
    pub stationary: bool,
    pub attractor: BasinLabel,
    pub steps: usize,
}

// Stage weights; the system is autonomous so the nodes are not needed.
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn norm2(a: [f64; 2]) -> f64 {
    sqrt(a[0] * a[0] + a[1] * a[1])
}

fn nearest(set: &EquilibriumSet, a: [f64; 2], radius: f64) -> BasinLabel {
    set.points
        .iter()
        .map(|e| (norm2([a[0] - e.a1, a[1] - e.a2]), e.label))
        .filter(|(d, _)| *d < radius)
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map_or(BasinLabel::Undecided, |(_, l)| l)
}

/// Integrates the amplitude system with an adaptive Dormand–Prince 5(4) pair.
pub fn integrate_amplitudes(
    cc: &CompetitionCoefficients,
    start: [f64; 2],
    opts: &IntegrationOptions,
) -> Result<Trajectory, CompetitionError> {
    if !(start[0] >= 0.0 && start[1] >= 0.0 && start[0].is_finite() && start[1].is_finite()) {
        return Err(CompetitionError::InvalidStart);
    }
    let f = |y: [f64; 2]| cc.flow(y);
    let mut y = start;
    let mut t = 0.0;
    let mut h = opts.initial_step;
    let mut samples = Vec::new();
    samples.push(TrajectorySample { t, a1: y[0], a2: y[1] });
    let mut k0 = f(y);
    let mut steps = 0;
    let mut stationary = norm2(k0) < opts.stationary_tol;
    while !stationary && t < opts.t_max {
        let remaining = opts.t_max - t;
        if remaining <= 1e-14 * (1.0 + t) {
            break;
        }
        h = h.min(remaining).min(opts.max_step);
        if h < 1e-14 * (1.0 + t) {
            return Err(CompetitionError::StepUnderflow { t });
        }
        let mut k = [[0.0; 2]; 7];
        k[0] = k0;
        for s in 0..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                yi[0] += h * A[s][j] * kj[0];
                yi[1] += h * A[s][j] * kj[1];
            }
            k[s + 1] = f(yi);
        }
        // Row 6 of A is the fifth-order solution (first same as last).
        let mut y5 = y;
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate() {
            let b5 = if j < 6 { A[5][j] } else { 0.0 };
            for i in 0..2 {
                y5[i] += h * b5 * kj[i];
                y4[i] += h * B4[j] * kj[i];
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let sc = opts.atol + opts.rtol * abs(y[i]).max(abs(y5[i]));
            err = err.max(abs(y5[i] - y4[i]) / sc);
        }
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k0 = k[6];
            steps += 1;
            let n = norm2(y);
            if !(n <= opts.blowup) {
                return Err(CompetitionError::Diverged { t, norm: n });
            }
            if opts.record {
                samples.push(TrajectorySample { t, a1: y[0], a2: y[1] });
            }
            stationary = norm2(k0) < opts.stationary_tol;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * pow(err, -0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    if !opts.record && steps > 0 {
        samples.push(TrajectorySample { t, a1: y[0], a2: y[1] });
    }
    let set = equilibria(cc);
    Ok(Trajectory {
        samples,
        end: y,
        t_end: t,
        stationary,
        attractor: nearest(&set, y, opts.attractor_radius),
        steps,
    })
}

/// Equilibrium reached from `start`.
pub fn basin_label(
    cc: &CompetitionCoefficients,
    start: [f64; 2],
    opts: &IntegrationOptions,
) -> Result<BasinLabel, CompetitionError> {
    let o = IntegrationOptions { record: false, ..*opts };
    Ok(integrate_amplitudes(cc, start, &o)?.attractor)
}

/// Basin labels on a rectangular grid of starting amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasinMap {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    /// Row-major: `labels[i * a2.len() + j]` starts at `(a1[i], a2[j])`.
    pub labels: Vec<BasinLabel>,
}

impl BasinMap {
    pub fn label(&self, i: usize, j: usize) -> BasinLabel {
        self.labels[i * self.a2.len() + j]
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Sequential basin sweep over `[a1_lo, a1_hi] × [a2_lo, a2_hi]`.
pub fn basin_map(
    cc: &CompetitionCoefficients,
    a1_range: (f64, f64),
    a2_range: (f64, f64),
    n: (usize, usize),
    opts: &IntegrationOptions,
) -> Result<BasinMap, CompetitionError> {
    let a1 = linspace(a1_range.0, a1_range.1, n.0);
    let a2 = linspace(a2_range.0, a2_range.1, n.1);
    let mut labels = Vec::with_capacity(a1.len() * a2.len());
    for &x in &a1 {
        for &y in &a2 {
            labels.push(basin_label(cc, [x, y], opts)?);
        }
    }
    Ok(BasinMap { a1, a2, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::competition::competition_coefficients;
    use crate::testutil::fig2;

    fn coeffs() -> CompetitionCoefficients {
        competition_coefficients(&fig2(), 4.0, 3.5, 0.4).unwrap()
    }

    #[test]
    fn equilibrium_structure() {
        let c = coeffs();
        let set = equilibria(&c);
        let labels: Vec<_> = set.points.iter().map(|e| e.label).collect();
        assert_eq!(
            labels,
            [BasinLabel::Trivial, BasinLabel::ModeOne, BasinLabel::ModeTwo, BasinLabel::Mixed]
        );

        let origin = &set.points[0];
        assert_eq!(origin.jacobian, Mat2::diag(c.sigma1, c.sigma2));
        assert_eq!(origin.class, EquilibriumClass::UnstableNode);

        let one = set.find(BasinLabel::ModeOne).unwrap();
        let two = set.find(BasinLabel::ModeTwo).unwrap();
        assert!((one.a1 - 0.28575).abs() < 1e-4);
        assert!((two.a2 - 0.31289).abs() < 1e-4);
        assert_eq!(one.class, EquilibriumClass::StableNode);
        assert_eq!(two.class, EquilibriumClass::StableNode);

        // Triangular Jacobian at the semi-trivial points.
        let e1 = one.eigenvalues;
        let expect = [-2.0 * c.sigma1, c.sigma2 - c.omega2 * c.sigma1 / c.l1];
        let mut got = [e1.0.re, e1.1.re];
        got.sort_by(f64::total_cmp);
        let mut want = expect;
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12 * (1.0 + w.abs()));
        }

        let mixed = set.find(BasinLabel::Mixed).unwrap();
        assert!((mixed.a1 - 0.178853).abs() < 1e-5, "{}", mixed.a1);
        assert!((mixed.a2 - 0.165141).abs() < 1e-5, "{}", mixed.a2);
        assert_eq!(mixed.class, EquilibriumClass::Saddle);
        let r = c.flow([mixed.a1, mixed.a2]);
        assert!(norm2(r) < 1e-12);
    }

    #[test]
    fn classification() {
        let r = Eigenvalue::real;
        assert_eq!(EquilibriumClass::classify((r(-2.0), r(-1.0))), EquilibriumClass::StableNode);
        assert_eq!(EquilibriumClass::classify((r(-2.0), r(1.0))), EquilibriumClass::Saddle);
        assert_eq!(EquilibriumClass::classify((r(1.0), r(2.0))), EquilibriumClass::UnstableNode);
        let c = |re, im| Eigenvalue { re, im };
        assert_eq!(EquilibriumClass::classify((c(-1.0, -1.0), c(-1.0, 1.0))), EquilibriumClass::StableFocus);
        assert_eq!(EquilibriumClass::classify((c(1.0, -1.0), c(1.0, 1.0))), EquilibriumClass::UnstableFocus);
        assert_eq!(EquilibriumClass::classify((r(0.0), r(-1.0))), EquilibriumClass::Degenerate);
    }

    #[test]
    fn starts_select_opposite_modes() {
        let c = coeffs();
        let o = IntegrationOptions::default();
        assert_eq!(basin_label(&c, [0.144, 0.228], &o).unwrap(), BasinLabel::ModeTwo);
        assert_eq!(basin_label(&c, [0.344, 0.108], &o).unwrap(), BasinLabel::ModeOne);
    }

    #[test]
    fn axes_are_invariant() {
        let c = coeffs();
        let t = integrate_amplitudes(&c, [0.05, 0.0], &IntegrationOptions::default()).unwrap();
        assert!(t.samples.iter().all(|s| s.a2 == 0.0));
        assert_eq!(t.attractor, BasinLabel::ModeOne);
        assert!(t.stationary);
        let t = integrate_amplitudes(&c, [0.0, 0.6], &IntegrationOptions::default()).unwrap();
        assert!(t.samples.iter().all(|s| s.a1 == 0.0));
        assert_eq!(t.attractor, BasinLabel::ModeTwo);
    }

    #[test]
    fn single_mode_matches_closed_form() {
        // dA/dT = sigma A - L A³ has A(T)² = sigma A0² / (L A0² + (sigma - L A0²) e^{-2 sigma T}).
        let c = coeffs();
        let o = IntegrationOptions { t_max: 0.5, stationary_tol: 0.0, ..Default::default() };
        let a0: f64 = 0.02;
        let t = integrate_amplitudes(&c, [a0, 0.0], &o).unwrap();
        let s = c.sigma1;
        let l = c.l1;
        let exact = (s * a0 * a0 / (l * a0 * a0 + (s - l * a0 * a0) * (-2.0 * s * t.t_end).exp())).sqrt();
        assert!((t.end[0] - exact).abs() < 1e-8, "{} vs {exact}", t.end[0]);
    }

    #[test]
    fn invalid_start_is_rejected() {
        let c = coeffs();
        let o = IntegrationOptions::default();
        assert_eq!(integrate_amplitudes(&c, [-0.1, 0.2], &o), Err(CompetitionError::InvalidStart));
        assert_eq!(integrate_amplitudes(&c, [f64::NAN, 0.2], &o), Err(CompetitionError::InvalidStart));
    }

    #[test]
    fn basin_map_shape() {
        let c = coeffs();
        let m = basin_map(&c, (0.0, 0.4), (0.0, 0.4), (3, 4), &IntegrationOptions::default()).unwrap();
        assert_eq!(m.labels.len(), 12);
        assert_eq!(m.label(0, 0), BasinLabel::Trivial);
        assert_eq!(m.label(2, 0), BasinLabel::ModeOne);
        assert_eq!(m.label(0, 3), BasinLabel::ModeTwo);
    }
}
