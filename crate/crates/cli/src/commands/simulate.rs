//! A single PDE run to steady state.

use serde::Serialize;

use super::{Context, Finished};
use crate::config::InitialData;
use crate::error::CliError;
use crate::report::Check;
use crate::sim::{initial_state, simulate, write_run, SimSpec, SimSummary};

#[derive(Serialize)]
struct SimulateResult<'a> {
    initial: &'a InitialData,
    run: &'a SimSummary,
}

/// Modes recorded when none are configured: the configured cosine or the
/// base mode of the expansion.
fn default_tracked(ctx: &Context) -> Vec<usize> {
    let l = ctx.config.params.domain_length;
    let k = match ctx.config.initial {
        InitialData::Cosine { wavenumber, .. } => Some(wavenumber),
        _ => ctx.resolved.base.map(|b| b.k),
    };
    let mut modes: Vec<usize> = match k {
        Some(k) => {
            let r = k * l / std::f64::consts::PI;
            vec![r.floor() as usize, r.ceil() as usize]
        }
        None => Vec::new(),
    };
    modes.retain(|n| *n >= 1);
    modes.dedup();
    modes
}

pub fn run(ctx: &mut Context) -> Result<Finished, CliError> {
    let cfg = ctx.config;
    let p = ctx.resolved.params;
    let grid = cfg.grid()?;
    let tracked = if cfg.solver.tracked_modes.is_empty() {
        default_tracked(ctx)
    } else {
        cfg.solver.tracked_modes.clone()
    };
    let spec = SimSpec {
        label: "simulate".into(),
        params: p,
        grid,
        initial: initial_state(cfg, &p, &grid),
        options: cfg.solver.steady_options(tracked),
        n_max: cfg.solver.n_max,
    };
    let run = simulate(&spec)?;
    write_run(ctx.out, "simulate", &grid, &run)?;

    let s = &run.summary;
    let mut done = Finished::new(&SimulateResult { initial: &cfg.initial, run: s })?;
    done.checks.push(Check::holds("converged", s.converged));
    let m = &s.measure;
    for (name, x) in [
        ("t", s.t),
        ("residual", s.residual),
        ("dominant_mode", m.dominant_mode as f64),
        ("dominant_k", m.dominant_wavenumber),
        ("amplitude", m.amplitude.abs()),
        ("peak_to_trough", m.peak_to_trough),
        ("sup_distance", m.sup_distance),
        ("mean", m.mean),
    ] {
        done.metric(name, x);
    }
    done.summary.push(format!(
        "{} at t = {:.3} (residual {:.3e})",
        if s.converged { "converged" } else { "not converged" },
        s.t,
        s.residual
    ));
    done.summary.push(format!(
        "dominant mode n = {} (k = {:.6}), amplitude {:.6e}, peak-to-trough {:.6e}",
        m.dominant_mode, m.dominant_wavenumber, m.amplitude, m.peak_to_trough
    ));
    Ok(done)
}
