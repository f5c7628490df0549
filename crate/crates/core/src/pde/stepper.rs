//! Time steppers: explicit RK4 and a semi-implicit scheme for long runs.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{logistic, rhs, taxis_divergence, trapezoid, FieldState, Grid1D, PdeError};
use crate::linalg::solve_tridiagonal;
use crate::params::ModelParams;

/// Default Courant factor `C` in the explicit step bound.
pub const DEFAULT_COURANT: f64 = 0.2;

/// Largest stable explicit step: `C dx² / max(d1, d2, chi max u(1-u))`,
/// further limited by `C / max(beta, mu)` so coarse grids stay inside the
/// reaction stability region.
pub fn stability_cap(p: &ModelParams, grid: &Grid1D, u: &[f64], courant: f64) -> f64 {
    let taxis = u.iter().fold(0.0f64, |m, &x| m.max(crate::math::abs(x * (1.0 - x))));
    let diff = p.d1.max(p.d2).max(crate::math::abs(p.chi) * taxis);
    let reaction =
        p.beta.max(crate::math::abs(p.mu) * (1.0 + 2.0 * u.iter().fold(0.0f64, |m, &x| m.max(x)) / p.u_c));
    let mut cap = courant * grid.dx * grid.dx / diff;
    if reaction > 0.0 {
        cap = cap.min(courant / reaction);
    }
    cap
}

/// Bookkeeping of one step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    /// Step actually taken after capping.
    pub dt: f64,
    /// Change of the trapezoidal integral of `u`.
    pub mass_change: f64,
    /// The step's quadrature of `∫ mu u (1 - u/u_c) dx`.
    pub source_integral: f64,
    /// Change of the trapezoidal integral of `v`.
    pub v_mass_change: f64,
    /// The step's quadrature of `∫ (alpha u - beta v) dx`.
    pub v_source_integral: f64,
}

/// Reusable RK4 buffers.
pub(crate) struct Rk4 {
    k: [[Vec<f64>; 2]; 4],
    stage: [Vec<f64>; 2],
    source: Vec<f64>,
    next: [Vec<f64>; 2],
}

impl Rk4 {
    pub(crate) fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Rk4 {
            k: [[z(), z()], [z(), z()], [z(), z()], [z(), z()]],
            stage: [z(), z()],
            source: z(),
            next: [z(), z()],
        }
    }

    /// One classical RK4 step of exactly `dt`.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn advance(
        &mut self,
        p: &ModelParams,
        grid: &Grid1D,
        s: &mut FieldState,
        dt: f64,
    ) -> Result<StepReport, PdeError> {
        const NODES: [f64; 4] = [0.0, 0.5, 0.5, 1.0];
        const WEIGHTS: [f64; 4] = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
        let n = grid.n_cells;
        let (mut src_u, mut src_v) = (0.0, 0.0);
        for i in 0..4 {
            let (k_prev, k_rest) = self.k.split_at_mut(i);
            let c = NODES[i] * dt;
            if i == 0 {
                self.stage[0].copy_from_slice(&s.u);
                self.stage[1].copy_from_slice(&s.v);
            } else {
                let kp = &k_prev[i - 1];
                for j in 0..n {
                    self.stage[0][j] = s.u[j] + c * kp[0][j];
                    self.stage[1][j] = s.v[j] + c * kp[1][j];
                }
            }
            let [ku, kv] = &mut k_rest[0];
            rhs(p, grid, &self.stage[0], &self.stage[1], ku, kv);
            for j in 0..n {
                self.source[j] = logistic(p, self.stage[0][j]);
            }
            src_u += WEIGHTS[i] * trapezoid(&self.source, grid.dx);
            for j in 0..n {
                self.source[j] = p.alpha * self.stage[0][j] - p.beta * self.stage[1][j];
            }
            src_v += WEIGHTS[i] * trapezoid(&self.source, grid.dx);
        }
        for j in 0..n {
            let mut du = 0.0;
            let mut dv = 0.0;
            for (w, k) in WEIGHTS.iter().zip(&self.k) {
                du += w * k[0][j];
                dv += w * k[1][j];
            }
            self.next[0][j] = s.u[j] + dt * du;
            self.next[1][j] = s.v[j] + dt * dv;
        }
        if self.next.iter().flatten().any(|x| !x.is_finite()) {
            return Err(PdeError::NonFinite { t: s.t + dt, last_good: Box::new(s.clone()) });
        }
        let report = StepReport {
            dt,
            mass_change: trapezoid(&self.next[0], grid.dx) - trapezoid(&s.u, grid.dx),
            source_integral: dt * src_u,
            v_mass_change: trapezoid(&self.next[1], grid.dx) - trapezoid(&s.v, grid.dx),
            v_source_integral: dt * src_v,
        };
        core::mem::swap(&mut s.u, &mut self.next[0]);
        core::mem::swap(&mut s.v, &mut self.next[1]);
        s.t += dt;
        s.steps += 1;
        Ok(report)
    }
}

/// One explicit RK4 step of `min(dt, stability_cap)`.
///
/// On non-finite output the state is left untouched and returned inside the error.
pub fn step(
    p: &ModelParams,
    grid: &Grid1D,
    s: &mut FieldState,
    dt: f64,
    courant: f64,
) -> Result<StepReport, PdeError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PdeError::InvalidStep(dt));
    }
    let dt = dt.min(stability_cap(p, grid, &s.u, courant));
    Rk4::new(grid.n_cells).advance(p, grid, s, dt)
}

/// Linearly implicit step for long runs.
///
/// Diffusion of both fields and the decay `-beta v` are implicit; taxis and
/// the logistic source are explicit; the production `alpha u` uses the
/// updated `u`. Each step costs two tridiagonal solves.
pub struct SemiImplicit {
    dt: f64,
    lower_u: Vec<f64>,
    diag_u: Vec<f64>,
    upper_u: Vec<f64>,
    lower_v: Vec<f64>,
    diag_v: Vec<f64>,
    upper_v: Vec<f64>,
    taxis: Vec<f64>,
    scratch: Vec<f64>,
    next_u: Vec<f64>,
    next_v: Vec<f64>,
}

fn neumann_matrix(n: usize, c: f64, extra: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let lower = {
        let mut l = vec![-c; n];
        l[0] = 0.0;
        l[n - 1] = -2.0 * c;
        l
    };
    let diag = vec![1.0 + 2.0 * c + extra; n];
    let upper = {
        let mut u = vec![-c; n];
        u[0] = -2.0 * c;
        u[n - 1] = 0.0;
        u
    };
    (lower, diag, upper)
}

impl SemiImplicit {
    pub fn new(p: &ModelParams, grid: &Grid1D, dt: f64) -> Result<Self, PdeError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PdeError::InvalidStep(dt));
        }
        let n = grid.n_cells;
        let h2 = grid.dx * grid.dx;
        let (lower_u, diag_u, upper_u) = neumann_matrix(n, p.d1 * dt / h2, 0.0);
        let (lower_v, diag_v, upper_v) = neumann_matrix(n, p.d2 * dt / h2, p.beta * dt);
        Ok(SemiImplicit {
            dt,
            lower_u,
            diag_u,
            upper_u,
            lower_v,
            diag_v,
            upper_v,
            taxis: vec![0.0; n],
            scratch: vec![0.0; n],
            next_u: vec![0.0; n],
            next_v: vec![0.0; n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn advance(&mut self, p: &ModelParams, grid: &Grid1D, s: &mut FieldState) -> Result<(), PdeError> {
        let dt = self.dt;
        taxis_divergence(&s.u, &s.v, p.chi, grid.dx, &mut self.taxis);
        for j in 0..grid.n_cells {
            self.next_u[j] = s.u[j] + dt * (logistic(p, s.u[j]) - self.taxis[j]);
        }
        solve_tridiagonal(&self.lower_u, &self.diag_u, &self.upper_u, &mut self.next_u, &mut self.scratch);
        for j in 0..grid.n_cells {
            self.next_v[j] = s.v[j] + dt * p.alpha * self.next_u[j];
        }
        solve_tridiagonal(&self.lower_v, &self.diag_v, &self.upper_v, &mut self.next_v, &mut self.scratch);
        if self.next_u.iter().chain(&self.next_v).any(|x| !x.is_finite()) {
            return Err(PdeError::NonFinite { t: s.t + dt, last_good: Box::new(s.clone()) });
        }
        core::mem::swap(&mut s.u, &mut self.next_u);
        core::mem::swap(&mut s.v, &mut self.next_v);
        s.t += dt;
        s.steps += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::cos;
    use crate::params::uniform_steady_state;
    use crate::testutil::{fig2, fig3};

    fn bumpy(g: &Grid1D, p: &ModelParams) -> FieldState {
        let ss = uniform_steady_state(p);
        let l = g.l;
        FieldState::from_fn(g, |x| {
            let c = core::f64::consts::PI * x / l;
            (ss.u_bar * (1.0 + 0.3 * cos(c) + 0.2 * cos(3.0 * c)), ss.v_bar * (1.0 - 0.2 * cos(2.0 * c)))
        })
    }

    #[test]
    fn uniform_state_stays_uniform() {
        let p = fig3().with_chi(2.5);
        let g = Grid1D::new(64, p.domain_length).unwrap();
        let mut s = FieldState::uniform(&g, &p);
        let s0 = s.clone();
        for _ in 0..50 {
            step(&p, &g, &mut s, 1.0, DEFAULT_COURANT).unwrap();
        }
        for (a, b) in s.u.iter().zip(&s0.u).chain(s.v.iter().zip(&s0.v)) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn discrete_mass_balance() {
        for p in [fig2().with_chi(2.5), fig3().with_chi(2.4)] {
            let g = Grid1D::new(80, p.domain_length).unwrap();
            let mut s = bumpy(&g, &p);
            for _ in 0..20 {
                let mass = trapezoid(&s.u, g.dx);
                let r = step(&p, &g, &mut s, 1.0, DEFAULT_COURANT).unwrap();
                assert!((r.mass_change - r.source_integral).abs() <= 1e-8 * mass * r.dt.max(1.0));
                let vmass = trapezoid(&s.v, g.dx);
                assert!((r.v_mass_change - r.v_source_integral).abs() <= 1e-8 * vmass);
            }
        }
    }

    #[test]
    fn step_is_fourth_order_in_time() {
        let p = fig2().with_chi(2.0);
        let g = Grid1D::new(32, p.domain_length).unwrap();
        let s0 = bumpy(&g, &p);
        let cap = stability_cap(&p, &g, &s0.u, DEFAULT_COURANT);
        let run = |dt: f64, n: usize| {
            let mut s = s0.clone();
            let mut rk = Rk4::new(g.n_cells);
            for _ in 0..n {
                rk.advance(&p, &g, &mut s, dt).unwrap();
            }
            s
        };
        let t = 8.0 * cap;
        let sup = |a: &FieldState, b: &FieldState| {
            a.u.iter().zip(&b.u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        let r: Vec<FieldState> = [2usize, 4, 8, 16, 32].iter().map(|&n| run(t / n as f64, n)).collect();
        let orders: Vec<f64> =
            (0..3).map(|i| (sup(&r[i], &r[i + 1]) / sup(&r[i + 1], &r[i + 2])).log2()).collect();
        let order = orders[2];
        assert!((order - 4.0).abs() < 0.3, "orders {orders:?}");
    }

    #[test]
    fn time_step_is_capped() {
        let p = fig3().with_chi(2.4);
        let g = Grid1D::new(100, p.domain_length).unwrap();
        let mut s = bumpy(&g, &p);
        let r = step(&p, &g, &mut s, 10.0, DEFAULT_COURANT).unwrap();
        assert!(r.dt < 10.0);
        assert!(r.dt <= DEFAULT_COURANT * g.dx * g.dx / p.d2 + 1e-15);
        assert!(matches!(step(&p, &g, &mut s, 0.0, DEFAULT_COURANT), Err(PdeError::InvalidStep(_))));
    }

    #[test]
    fn non_finite_state_is_rejected_and_kept() {
        let p = fig3().with_chi(2.4);
        let g = Grid1D::new(32, p.domain_length).unwrap();
        let mut s = bumpy(&g, &p);
        s.v[3] = f64::INFINITY;
        let before = s.clone();
        match step(&p, &g, &mut s, 0.01, DEFAULT_COURANT) {
            Err(PdeError::NonFinite { last_good, .. }) => assert_eq!(*last_good, before),
            other => panic!("{other:?}"),
        }
        assert_eq!(s, before);
    }

    #[test]
    fn semi_implicit_agrees_with_rk4_for_small_steps() {
        let p = fig2().with_chi(2.0);
        let g = Grid1D::new(64, p.domain_length).unwrap();
        let s0 = bumpy(&g, &p);
        let t = 0.05;
        let mut a = s0.clone();
        while a.t < t - 1e-12 {
            let dt = (t - a.t).min(stability_cap(&p, &g, &a.u, DEFAULT_COURANT));
            Rk4::new(g.n_cells).advance(&p, &g, &mut a, dt).unwrap();
        }
        let errs: Vec<f64> = [1e-3, 5e-4]
            .iter()
            .map(|&dt| {
                let mut b = s0.clone();
                let mut si = SemiImplicit::new(&p, &g, dt).unwrap();
                for _ in 0..(t / dt).round() as usize {
                    si.advance(&p, &g, &mut b).unwrap();
                }
                a.u.iter().zip(&b.u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            })
            .collect();
        // First order in time.
        assert!(errs[1] < 0.6 * errs[0], "{errs:?}");
        assert!(errs[1] < 1e-3);
    }
}
