//! Finite-difference method-of-lines solver for the full system.
//!
//! The grid is node-centred, `x_j = j dx` with `dx = l / (n - 1)`, and the
//! no-flux conditions are imposed by mirror ghost nodes. Cosine modes
//! `cos(n pi x / l)` are then exact eigenvectors of the discrete Laplacian.

mod measure;
mod steady;
mod stepper;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::params::{uniform_steady_state, ModelParams};

pub use measure::{
    convergence_study, measure_pattern, project_modes, sup_distance, trapezoid, ConvergenceReport,
    ConvergenceScenario, PatternMeasure,
};
pub use steady::{run_to_steady, ResidualSample, Scheme, SteadyOptions, SteadyRun};
pub use stepper::{stability_cap, step, SemiImplicit, StepReport, DEFAULT_COURANT};

/// Smallest admissible number of nodes.
pub const MIN_NODES: usize = 16;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PdeError {
    #[error("grid needs at least {MIN_NODES} nodes, got {0}")]
    GridTooSmall(usize),
    #[error("domain length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("field length {got} does not match the {expected}-node grid")]
    LengthMismatch { expected: usize, got: usize },
    #[error("initial data must be finite and non-negative")]
    InvalidInitialData,
    #[error("non-finite values at t = {t}; last good state kept")]
    NonFinite { t: f64, last_good: Box<FieldState> },
    #[error("not converged by t = {t}: residual {residual:e} (tolerance {tol:e})")]
    NotConverged { t: f64, residual: f64, tol: f64, history: Vec<ResidualSample>, state: Box<FieldState> },
    #[error("convergence study: {0}")]
    Convergence(&'static str),
}

/// Uniform node-centred grid on `[0, l]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n_cells: usize,
    pub l: f64,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, l: f64) -> Result<Self, PdeError> {
        if n_cells < MIN_NODES {
            return Err(PdeError::GridTooSmall(n_cells));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(PdeError::InvalidLength(l));
        }
        Ok(Grid1D { n_cells, l, dx: l / (n_cells - 1) as f64 })
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.x(j)).collect()
    }
}

/// Node values of both fields plus run diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    /// `max |du/dt|` when last evaluated.
    pub residual: f64,
    pub steps: u64,
}

impl FieldState {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Self {
        FieldState { u, v, t: 0.0, residual: f64::INFINITY, steps: 0 }
    }

    /// Samples `f(x) = (u, v)` at every node.
    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let (u, v) = (0..grid.n_cells).map(|j| f(grid.x(j))).unzip();
        FieldState::new(u, v)
    }

    pub fn uniform(grid: &Grid1D, p: &ModelParams) -> Self {
        let s = uniform_steady_state(p);
        FieldState::new(vec![s.u_bar; grid.n_cells], vec![s.v_bar; grid.n_cells])
    }

    /// `u = u_c (1 + rel xi)`, `v = v_bar (1 + rel xi')` with `xi, xi'`
    /// uniform on `[-1, 1]` drawn from a seeded ChaCha8 stream.
    pub fn perturbed_uniform(grid: &Grid1D, p: &ModelParams, rel: f64, seed: u64) -> Self {
        let s = uniform_steady_state(p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = Vec::with_capacity(grid.n_cells);
        for _ in 0..grid.n_cells {
            u.push(s.u_bar * (1.0 + rel * rng.random_range(-1.0..=1.0)));
        }
        let mut v = Vec::with_capacity(grid.n_cells);
        for _ in 0..grid.n_cells {
            v.push(s.v_bar * (1.0 + rel * rng.random_range(-1.0..=1.0)));
        }
        FieldState::new(u, v)
    }

    pub fn check(&self, grid: &Grid1D) -> Result<(), PdeError> {
        for f in [&self.u, &self.v] {
            if f.len() != grid.n_cells {
                return Err(PdeError::LengthMismatch { expected: grid.n_cells, got: f.len() });
            }
        }
        if self.u.iter().chain(&self.v).any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(PdeError::InvalidInitialData);
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// Writes `d2 f / dx²` with mirrored ghost nodes.
pub fn laplacian(f: &[f64], dx: f64, out: &mut [f64]) {
    let n = f.len();
    let h2 = dx * dx;
    out[0] = 2.0 * (f[1] - f[0]) / h2;
    out[n - 1] = 2.0 * (f[n - 2] - f[n - 1]) / h2;
    for j in 1..n - 1 {
        out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / h2;
    }
}

/// Writes the divergence of the chemotactic flux `chi u (1 - u) v_x`.
///
/// Face values use the arithmetic mean of `u`; the mirrored boundary faces
/// carry no flux.
#[allow(clippy::needless_range_loop)]
pub fn taxis_divergence(u: &[f64], v: &[f64], chi: f64, dx: f64, out: &mut [f64]) {
    let n = u.len();
    let flux = |j: usize| {
        let ub = 0.5 * (u[j] + u[j + 1]);
        chi * ub * (1.0 - ub) * (v[j + 1] - v[j]) / dx
    };
    let mut left = flux(0);
    out[0] = 2.0 * left / dx;
    for j in 1..n - 1 {
        let right = flux(j);
        out[j] = (right - left) / dx;
        left = right;
    }
    out[n - 1] = -2.0 * left / dx;
}

/// Logistic source `mu u (1 - u / u_c)`.
#[inline]
pub fn logistic(p: &ModelParams, u: f64) -> f64 {
    p.mu * u * (1.0 - u / p.u_c)
}

/// Semi-discrete right-hand side at sensitivity `p.chi`.
pub fn rhs(p: &ModelParams, grid: &Grid1D, u: &[f64], v: &[f64], du: &mut [f64], dv: &mut [f64]) {
    laplacian(u, grid.dx, du);
    // dv holds the taxis divergence until the u equation is assembled.
    taxis_divergence(u, v, p.chi, grid.dx, dv);
    for j in 0..u.len() {
        du[j] = p.d1 * du[j] - dv[j] + logistic(p, u[j]);
    }
    laplacian(v, grid.dx, dv);
    for j in 0..u.len() {
        dv[j] = p.d2 * dv[j] + p.alpha * u[j] - p.beta * v[j];
    }
}

/// `max_j |du_j/dt|`.
pub fn residual(p: &ModelParams, grid: &Grid1D, s: &FieldState) -> f64 {
    let n = grid.n_cells;
    let (mut du, mut dv) = (vec![0.0; n], vec![0.0; n]);
    rhs(p, grid, &s.u, &s.v, &mut du, &mut dv);
    du.iter().fold(0.0, |m, x| m.max(crate::math::abs(*x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, PI};
    use crate::stability::lambda_plus;
    use crate::testutil::{fig2, fig3};

    #[test]
    fn grid_validation() {
        assert_eq!(Grid1D::new(15, 1.0), Err(PdeError::GridTooSmall(15)));
        assert!(matches!(Grid1D::new(16, 0.0), Err(PdeError::InvalidLength(_))));
        let g = Grid1D::new(101, 2.0).unwrap();
        assert_eq!(g.dx, 0.02);
        assert_eq!(g.x(100), 2.0);
    }

    #[test]
    fn uniform_state_is_exact_equilibrium() {
        for p in [fig2().with_chi(3.0), fig3().with_chi(2.4)] {
            let g = Grid1D::new(64, p.domain_length).unwrap();
            let s = FieldState::uniform(&g, &p);
            let (mut du, mut dv) = (vec![1.0; 64], vec![1.0; 64]);
            rhs(&p, &g, &s.u, &s.v, &mut du, &mut dv);
            assert!(du.iter().all(|x| *x == 0.0));
            assert!(dv.iter().all(|x| x.abs() < 1e-15));
        }
    }

    #[test]
    fn zero_sensitivity_isolates_fisher_kpp() {
        let p = fig3();
        let g = Grid1D::new(40, p.domain_length).unwrap();
        let s = FieldState::from_fn(&g, |x| (0.3 + 0.1 * cos(x), 1.0 + x));
        let (mut du, mut dv) = (vec![0.0; 40], vec![0.0; 40]);
        rhs(&p, &g, &s.u, &s.v, &mut du, &mut dv);
        let mut lap = vec![0.0; 40];
        laplacian(&s.u, g.dx, &mut lap);
        for j in 0..40 {
            assert_eq!(du[j], p.d1 * lap[j] + logistic(&p, s.u[j]));
        }
    }

    #[test]
    fn cosines_are_laplacian_eigenvectors() {
        let g = Grid1D::new(65, 3.0).unwrap();
        let n = 5.0;
        let k = n * PI / g.l;
        let f: Vec<f64> = g.nodes().iter().map(|x| cos(k * x)).collect();
        let mut out = vec![0.0; 65];
        laplacian(&f, g.dx, &mut out);
        let eig = -(2.0 - 2.0 * cos(k * g.dx)) / (g.dx * g.dx);
        for j in 0..65 {
            assert!((out[j] - eig * f[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn linearized_rhs_matches_dispersion() {
        // Perturb along the growing eigenvector of the mode; the linear part of
        // the right-hand side must scale it by lambda_plus.
        let base = fig2();
        let p = base.with_chi(1.8);
        let g = Grid1D::new(1025, p.domain_length).unwrap();
        let k = 7.0 * PI / g.l;
        let l = p.mode_operator(k * k, p.chi);
        let lam = lambda_plus(k * k, &p);
        let mu_ = (lam - l.0[1][1]) / l.0[1][0];
        let a = 1e-6;
        let ss = uniform_steady_state(&p);
        let s = FieldState::from_fn(&g, |x| (ss.u_bar + a * mu_ * cos(k * x), ss.v_bar + a * cos(k * x)));
        let (mut du, mut dv) = (vec![0.0; g.n_cells], vec![0.0; g.n_cells]);
        rhs(&p, &g, &s.u, &s.v, &mut du, &mut dv);
        let j = 0;
        let rate = dv[j] / (s.v[j] - ss.v_bar);
        assert!((rate - lam).abs() < 1e-3 * (1.0 + lam.abs()), "{rate} vs {lam}");
        let rate_u = du[j] / (s.u[j] - ss.u_bar);
        assert!((rate_u - lam).abs() < 1e-3 * (1.0 + lam.abs()), "{rate_u} vs {lam}");
    }

    #[test]
    fn seeded_perturbation_is_reproducible() {
        let p = fig2();
        let g = Grid1D::new(32, p.domain_length).unwrap();
        let a = FieldState::perturbed_uniform(&g, &p, 0.01, 7);
        assert_eq!(a, FieldState::perturbed_uniform(&g, &p, 0.01, 7));
        assert_ne!(a, FieldState::perturbed_uniform(&g, &p, 0.01, 8));
        assert!(a.u.iter().all(|u| (u / p.u_c - 1.0).abs() <= 0.01));
        a.check(&g).unwrap();
    }
}
