//! Time marching to a steady state.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::measure::project_modes;
use super::stepper::{stability_cap, Rk4, SemiImplicit};
use super::{rhs, FieldState, Grid1D, PdeError};
use crate::math::abs;
use crate::params::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    /// Explicit RK4 at `courant` times the stability bound.
    Rk4 { courant: f64 },
    /// Linearly implicit diffusion with a fixed step.
    SemiImplicit { dt: f64 },
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::SemiImplicit { dt: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    pub scheme: Scheme,
    /// Stop once `max |du/dt|` is below this.
    pub residual_tol: f64,
    /// Physical time horizon.
    pub t_max: f64,
    /// Steps between residual evaluations.
    pub check_every: u64,
    /// Cosine modes recorded in the history.
    pub tracked_modes: Vec<usize>,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            scheme: Scheme::default(),
            residual_tol: 1e-8,
            t_max: 40_000.0,
            check_every: 100,
            tracked_modes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    pub residual: f64,
    /// `a_n` for each tracked mode.
    pub modes: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyRun {
    pub state: FieldState,
    pub history: Vec<ResidualSample>,
    /// Extremes of `u` over every step, for positivity monitoring.
    pub u_min_seen: f64,
    pub u_max_seen: f64,
}

enum Stepper {
    Rk4(Rk4, f64),
    Semi(SemiImplicit),
}

/// Marches `initial` until `max |du/dt| < residual_tol` or `t_max` is reached.
pub fn run_to_steady(
    p: &ModelParams,
    grid: &Grid1D,
    initial: FieldState,
    opts: &SteadyOptions,
) -> Result<SteadyRun, PdeError> {
    initial.check(grid)?;
    let mut stepper = match opts.scheme {
        Scheme::Rk4 { courant } => {
            if !(courant > 0.0 && courant.is_finite()) {
                return Err(PdeError::InvalidStep(courant));
            }
            Stepper::Rk4(Rk4::new(grid.n_cells), courant)
        }
        Scheme::SemiImplicit { dt } => Stepper::Semi(SemiImplicit::new(p, grid, dt)?),
    };
    let n = grid.n_cells;
    let (mut du, mut dv) = (vec![0.0; n], vec![0.0; n]);
    let n_max = opts.tracked_modes.iter().copied().max().unwrap_or(0).min(n - 1);
    let sample = |s: &FieldState, du: &mut [f64], dv: &mut [f64]| {
        rhs(p, grid, &s.u, &s.v, du, dv);
        let residual = du.iter().fold(0.0, |m: f64, x| m.max(abs(*x)));
        let (_, a) = project_modes(grid, &s.u, n_max);
        let modes = opts.tracked_modes.iter().map(|&m| if m <= n_max { a[m] } else { f64::NAN }).collect();
        ResidualSample { t: s.t, residual, modes }
    };

    let mut s = initial;
    let mut history = Vec::new();
    let mut lo = s.u.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = s.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = sample(&s, &mut du, &mut dv);
    s.residual = first.residual;
    history.push(first);
    let check_every = opts.check_every.max(1);
    loop {
        if s.residual < opts.residual_tol {
            return Ok(SteadyRun { state: s, history, u_min_seen: lo, u_max_seen: hi });
        }
        if s.t >= opts.t_max {
            return Err(PdeError::NotConverged {
                t: s.t,
                residual: s.residual,
                tol: opts.residual_tol,
                history,
                state: Box::new(s),
            });
        }
        for _ in 0..check_every {
            match &mut stepper {
                Stepper::Rk4(rk, courant) => {
                    let dt = stability_cap(p, grid, &s.u, *courant);
                    rk.advance(p, grid, &mut s, dt)?;
                }
                Stepper::Semi(si) => si.advance(p, grid, &mut s)?,
            }
            for &x in &s.u {
                lo = lo.min(x);
                hi = hi.max(x);
            }
            if s.t >= opts.t_max {
                break;
            }
        }
        let r = sample(&s, &mut du, &mut dv);
        s.residual = r.residual;
        history.push(r);
    }
}
