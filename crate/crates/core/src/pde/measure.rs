//! Pattern measurement and grid-convergence studies.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::stepper::{stability_cap, Rk4, DEFAULT_COURANT};
use super::{FieldState, Grid1D, PdeError};
use crate::math::{abs, ceil, cos, ln, PI};
use crate::params::{uniform_steady_state, ModelParams};

/// Trapezoidal integral of node values with spacing `dx`.
pub fn trapezoid(f: &[f64], dx: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => dx * (f[1..n - 1].iter().sum::<f64>() + 0.5 * (f[0] + f[n - 1])),
    }
}

/// `a_n = (2/l) ∫ (u - mean) cos(n pi x / l) dx` for `n = 0..=n_max`, by the
/// trapezoid rule. `a_0` is zero by construction.
pub fn project_modes(grid: &Grid1D, u: &[f64], n_max: usize) -> (f64, Vec<f64>) {
    let mean = trapezoid(u, grid.dx) / grid.l;
    let mut buf = Vec::with_capacity(u.len());
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        buf.clear();
        let k = n as f64 * PI / grid.l;
        buf.extend(u.iter().enumerate().map(|(j, &uj)| (uj - mean) * cos(k * grid.x(j))));
        out.push(2.0 / grid.l * trapezoid(&buf, grid.dx));
    }
    (mean, out)
}

/// `max_j |f_j - c|`.
pub fn sup_distance(f: &[f64], c: f64) -> f64 {
    f.iter().fold(0.0, |m, x| m.max(abs(x - c)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternMeasure {
    pub mean: f64,
    /// Cosine coefficients `a_0..=a_{n_max}` of `u`.
    pub coefficients: Vec<f64>,
    /// Index with the largest `|a_n|`, `n >= 1`.
    pub dominant_mode: usize,
    /// `n* pi / l`.
    pub dominant_wavenumber: f64,
    /// Signed `a_{n*}`.
    pub amplitude: f64,
    pub peak_to_trough: f64,
    /// `max |u - u_c|`.
    pub sup_distance: f64,
    pub u_min: f64,
    pub u_max: f64,
}

/// Spectrum and summary of `u`. `n_max` is clamped to `n_cells - 1`.
pub fn measure_pattern(p: &ModelParams, grid: &Grid1D, s: &FieldState, n_max: usize) -> PatternMeasure {
    let n_max = n_max.clamp(1, grid.n_cells - 1);
    let (mean, coefficients) = project_modes(grid, &s.u, n_max);
    let dominant_mode = (1..=n_max)
        .max_by(|&a, &b| abs(coefficients[a]).total_cmp(&abs(coefficients[b])).then(b.cmp(&a)))
        .unwrap_or(1);
    let u_min = s.u.iter().copied().fold(f64::INFINITY, f64::min);
    let u_max = s.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    PatternMeasure {
        mean,
        dominant_wavenumber: dominant_mode as f64 * PI / grid.l,
        amplitude: coefficients[dominant_mode],
        coefficients,
        dominant_mode,
        peak_to_trough: u_max - u_min,
        sup_distance: sup_distance(&s.u, uniform_steady_state(p).u_bar),
        u_min,
        u_max,
    }
}

/// Smooth short-time scenarios for grid refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceScenario {
    /// `chi = mu = alpha = 0`: two decoupled heat equations (with decay in `v`).
    DiffusionOnly,
    /// The full model at the given parameters.
    FullModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub nodes: Vec<usize>,
    pub t_end: f64,
    /// Sup difference of `u` between successive grids on the coarser nodes.
    pub differences: Vec<f64>,
    /// Observed orders from each consecutive pair of differences.
    pub orders: Vec<f64>,
    pub observed_order: f64,
}

fn initial(p: &ModelParams, g: &Grid1D) -> FieldState {
    let ss = uniform_steady_state(p);
    let l = g.l;
    FieldState::from_fn(g, |x| {
        let c = PI * x / l;
        (
            ss.u_bar * (1.0 + 0.2 * cos(c) - 0.1 * cos(2.0 * c) + 0.05 * cos(3.0 * c)),
            ss.v_bar * (1.0 + 0.1 * cos(2.0 * c)) + 0.05 * cos(c),
        )
    })
}

fn evolve(p: &ModelParams, g: &Grid1D, t_end: f64) -> Result<FieldState, PdeError> {
    let mut s = initial(p, g);
    let cap = stability_cap(p, g, &s.u, 0.5 * DEFAULT_COURANT);
    let steps = ceil(t_end / cap).max(1.0) as usize;
    let dt = t_end / steps as f64;
    let mut rk = Rk4::new(g.n_cells);
    for _ in 0..steps {
        rk.advance(p, g, &mut s, dt)?;
    }
    Ok(s)
}

/// Runs the scenario to `t_end` on nested grids (`nodes[i+1] - 1` a multiple
/// of `nodes[i] - 1`) and reports the observed spatial order.
pub fn convergence_study(
    p: &ModelParams,
    scenario: ConvergenceScenario,
    nodes: &[usize],
    t_end: f64,
) -> Result<ConvergenceReport, PdeError> {
    if nodes.len() < 3 {
        return Err(PdeError::Convergence("need at least three grids"));
    }
    for w in nodes.windows(2) {
        if w[0] == w[1] {
            return Err(PdeError::Convergence("grids must differ"));
        }
        if w[1] < w[0] || (w[1] - 1) % (w[0] - 1) != 0 {
            return Err(PdeError::Convergence("grids must be nested and increasing"));
        }
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(PdeError::InvalidStep(t_end));
    }
    let q = match scenario {
        ConvergenceScenario::DiffusionOnly => ModelParams { chi: 0.0, mu: 0.0, alpha: 0.0, ..*p },
        ConvergenceScenario::FullModel => *p,
    };
    let mut grids = Vec::with_capacity(nodes.len());
    let mut states = Vec::with_capacity(nodes.len());
    for &n in nodes {
        let g = Grid1D::new(n, p.domain_length)?;
        states.push(evolve(&q, &g, t_end)?);
        grids.push(g);
    }
    let mut differences = Vec::with_capacity(nodes.len() - 1);
    for i in 0..nodes.len() - 1 {
        let stride = (nodes[i + 1] - 1) / (nodes[i] - 1);
        let d = (0..nodes[i]).map(|j| abs(states[i].u[j] - states[i + 1].u[j * stride])).fold(0.0, f64::max);
        differences.push(d);
    }
    let mut orders = Vec::with_capacity(nodes.len() - 2);
    for i in 0..differences.len() - 1 {
        let ratio = (nodes[i + 1] - 1) as f64 / (nodes[i] - 1) as f64;
        orders.push(ln(differences[i] / differences[i + 1]) / ln(ratio));
    }
    let observed_order = *orders.last().unwrap_or(&f64::NAN);
    Ok(ConvergenceReport { nodes: nodes.to_vec(), t_end, differences, orders, observed_order })
}
