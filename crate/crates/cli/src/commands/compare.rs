//! Steady PDE pattern against the asymptotic reconstruction.

use chemopattern_core::amplitude::{
    eigenpair, quintic_landau, reconstruct_series, stationary_amplitude_cubic, stationary_amplitude_quintic,
    AmplitudeError, ExpansionSetup, LandauCoefficients,
};
use chemopattern_core::pde::{sup_distance, trapezoid, Grid1D};
use serde::Serialize;

use super::{Context, Finished};
use crate::error::CliError;
use crate::report::{relative_error, Bound, Check, ComparisonReport, ModeInfo};
use crate::sim::{initial_state, simulate, write_run, xy, SimSpec, SimSummary};
use crate::svg::{Plot, Series, Style};

/// The same amplitude pushed through the second-order series only.
#[derive(Clone, Copy, Debug, Serialize)]
struct Truncation {
    order: u32,
    predicted_amplitude: f64,
    relative_amplitude_error: Option<f64>,
    sup_error: f64,
}

#[derive(Serialize)]
struct CompareResult<'a> {
    eps: f64,
    /// Stationary solution `A` of the amplitude equation used in the series.
    amplitude_a: f64,
    sigma: f64,
    l_cubic: f64,
    sigma_bar: f64,
    l_bar: f64,
    q_bar: f64,
    run: &'a SimSummary,
    comparison: Option<ComparisonReport>,
    second_order: Option<Truncation>,
    /// Set instead of a comparison when the run did not reach a steady state.
    diagnostics: Option<String>,
}

fn field_errors(grid: &Grid1D, u: &[f64], pred: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = u.iter().zip(pred).map(|(a, b)| a - b).collect();
    let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
    ((trapezoid(&sq, grid.dx) / grid.l).sqrt(), sup_distance(&d, 0.0))
}

fn stationary_a(c: &LandauCoefficients, order: u32) -> Result<f64, CliError> {
    Ok(match order {
        2 => stationary_amplitude_cubic(c.sigma, c.l_cubic)?,
        _ => stationary_amplitude_quintic(c.sigma_bar, c.l_bar, c.q_bar).stable.ok_or(
            AmplitudeError::NoStableAmplitude { sigma_bar: c.sigma_bar, l_bar: c.l_bar, q_bar: c.q_bar },
        )?,
    })
}

pub fn run(ctx: &mut Context) -> Result<Finished, CliError> {
    let cfg = ctx.config;
    let cc = &cfg.compare;
    let base = ctx.resolved.base.ok_or(CliError::Unsupported {
        what: "compare",
        reason: "no finite threshold for these parameters".into(),
    })?;
    let eps = ctx.resolved.eps.ok_or(CliError::Unsupported {
        what: "compare",
        reason: format!("needs chi >= {} (eps² >= 0)", base.chi_c),
    })?;
    let p0 = cfg.base_params();
    let p = ctx.resolved.params;
    let c = quintic_landau(&p0, &base, &ExpansionSetup::from_eps(eps, &base), &eigenpair(&p0, base.k))?;
    let a = stationary_a(&c, cc.order)?;

    let grid = cfg.grid()?;
    let l = grid.l;
    let predicted_mode = ModeInfo::from_k(base.k, l);
    let tracked = if cfg.solver.tracked_modes.is_empty() {
        let r = base.k * l / std::f64::consts::PI;
        let mut v = vec![r.floor() as usize, r.ceil() as usize];
        v.retain(|n| *n >= 1);
        v.dedup();
        v
    } else {
        cfg.solver.tracked_modes.clone()
    };
    let spec = SimSpec {
        label: "compare".into(),
        params: p,
        grid,
        initial: initial_state(cfg, &p, &grid),
        options: cfg.solver.steady_options(tracked),
        n_max: cfg.solver.n_max,
    };
    let run = simulate(&spec)?;
    write_run(ctx.out, "compare", &grid, &run)?;
    let s = &run.summary;
    let m = &s.measure;

    let mut result = CompareResult {
        eps,
        amplitude_a: a,
        sigma: c.sigma,
        l_cubic: c.l_cubic,
        sigma_bar: c.sigma_bar,
        l_bar: c.l_bar,
        q_bar: c.q_bar,
        run: s,
        comparison: None,
        second_order: None,
        diagnostics: None,
    };
    if !s.converged {
        result.diagnostics = Some(format!(
            "{}; no overlay produced (residual history in compare_history.csv)",
            s.failure.as_deref().unwrap_or("not converged")
        ));
        let mut done = Finished::new(&result)?;
        done.checks.push(Check::holds("converged", false));
        done.metric("t", s.t);
        done.metric("residual", s.residual);
        done.summary.push(result.diagnostics.clone().unwrap_or_default());
        return Ok(done);
    }

    let sign = if m.amplitude < 0.0 { -1.0 } else { 1.0 };
    let x = grid.nodes();
    let rec = reconstruct_series(&p0, &c, eps, sign * a, cc.order, &x);
    let (l2, sup) = field_errors(&grid, &run.state.u, &rec.u);
    let predicted_amplitude = rec.fundamental.abs();
    let measured_amplitude = m.amplitude.abs();
    let rel_err = relative_error(measured_amplitude, predicted_amplitude);
    let measured_mode = ModeInfo::from_n(m.dominant_mode, l);
    let mode_match = predicted_mode.n == measured_mode.n;

    let mut checks = vec![
        Check::holds("converged", true),
        Check::new("relative_amplitude_error", rel_err.unwrap_or(f64::NAN), Bound::AtMost, cc.amplitude_tol),
    ];
    if cc.require_mode_match {
        checks.push(Check::holds("mode_match", mode_match));
    }
    if cc.sup_tol_rel.is_some() || cc.sup_tol_eps3.is_some() {
        let limit = (cc.sup_tol_rel.unwrap_or(0.0) * predicted_amplitude)
            .max(cc.sup_tol_eps3.unwrap_or(0.0) * eps * eps * eps);
        checks.push(Check::new("sup_error", sup, Bound::AtMost, limit));
    }

    let second = (cc.order > 2).then(|| {
        let r2 = reconstruct_series(&p0, &c, eps, sign * a, 2, &x);
        let (_, sup2) = field_errors(&grid, &run.state.u, &r2.u);
        (
            Truncation {
                order: 2,
                predicted_amplitude: r2.fundamental.abs(),
                relative_amplitude_error: relative_error(measured_amplitude, r2.fundamental.abs()),
                sup_error: sup2,
            },
            r2,
        )
    });
    if cc.require_better_than_second {
        let e2 = second.as_ref().and_then(|(t, _)| t.relative_amplitude_error).unwrap_or(f64::NAN);
        checks.push(Check::new(
            "relative_amplitude_error_vs_second_order",
            rel_err.unwrap_or(f64::NAN),
            Bound::Below,
            e2,
        ));
    }
    let report = ComparisonReport {
        label: format!("order {} reconstruction", cc.order),
        order: Some(cc.order),
        predicted_mode: Some(predicted_mode),
        measured_mode,
        predicted_amplitude,
        measured_amplitude,
        relative_amplitude_error: rel_err,
        l2_error: Some(l2),
        sup_error: Some(sup),
        checks,
        pass: false,
    }
    .finish();

    let mut header = vec!["x", "u_pde", "u_predicted"];
    if second.is_some() {
        header.push("u_second_order");
    }
    let rows: Vec<Vec<f64>> = (0..grid.n_cells)
        .map(|j| {
            let mut r = vec![x[j], run.state.u[j], rec.u[j]];
            if let Some((_, r2)) = &second {
                r.push(r2.u[j]);
            }
            r
        })
        .collect();
    ctx.out.csv_numeric("compare_overlay.csv", &header, &rows)?;
    let mut plot = Plot::new(format!("PDE against order-{} reconstruction, eps = {eps}", cc.order), "x", "u");
    plot.series.push(Series::new("PDE steady state", xy(&grid, &run.state.u), Style::Line));
    plot.series.push(Series::new(format!("order {}", cc.order), xy(&grid, &rec.u), Style::Dashed));
    if let Some((_, r2)) = &second {
        plot.series.push(Series::new("order 2", xy(&grid, &r2.u), Style::Dashed).color("#2ca02c"));
    }
    plot.notes
        .push(format!("amplitude: predicted {:.5}, measured {:.5}", predicted_amplitude, measured_amplitude));
    ctx.out.svg("compare_overlay.svg", &plot)?;

    result.second_order = second.map(|(t, _)| t);
    result.comparison = Some(report.clone());
    let mut done = Finished::new(&result)?;
    done.checks = report.checks.clone();
    for (name, x) in [
        ("eps", eps),
        ("amplitude_a", a),
        ("predicted_amplitude", predicted_amplitude),
        ("measured_amplitude", measured_amplitude),
        ("relative_amplitude_error", rel_err.unwrap_or(f64::NAN)),
        ("l2_error", l2),
        ("sup_error", sup),
        ("predicted_k", predicted_mode.k),
        ("measured_k", measured_mode.k),
        ("measured_mode", m.dominant_mode as f64),
        ("mode_match", mode_match as u8 as f64),
        ("t", s.t),
        ("residual", s.residual),
    ] {
        done.metric(name, x);
    }
    if let Some(t) = &result.second_order {
        done.metric("second_order_relative_amplitude_error", t.relative_amplitude_error.unwrap_or(f64::NAN));
        done.metric("second_order_sup_error", t.sup_error);
    }
    done.summary.push(format!(
        "mode: predicted k = {:.6}, measured n = {} (k = {:.6})",
        predicted_mode.k, m.dominant_mode, measured_mode.k
    ));
    done.summary.push(format!(
        "amplitude: predicted {:.6}, measured {:.6}, relative error {:.4}",
        predicted_amplitude,
        measured_amplitude,
        rel_err.unwrap_or(f64::NAN)
    ));
    done.summary.push(format!("field error: L2 {l2:.3e}, sup {sup:.3e}"));
    if let Some(t) = &result.second_order {
        done.summary.push(format!(
            "order-2 truncation: relative amplitude error {:.4}",
            t.relative_amplitude_error.unwrap_or(f64::NAN)
        ));
    }
    Ok(done)
}
