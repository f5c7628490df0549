//! PDE runs shared by the simulation commands, run concurrently when there
//! are several.

use std::thread;

use chemopattern_core::params::uniform_steady_state;
use chemopattern_core::pde::{
    measure_pattern, run_to_steady, FieldState, Grid1D, PatternMeasure, PdeError, ResidualSample, Scheme,
    SteadyOptions,
};
use chemopattern_core::ModelParams;
use serde::Serialize;

use crate::config::{ExperimentConfig, InitialData};
use crate::error::CliError;
use crate::output::{num, OutputDir};
use crate::svg::{Plot, Series, Style};

pub struct SimSpec {
    pub label: String,
    pub params: ModelParams,
    pub grid: Grid1D,
    pub initial: FieldState,
    pub options: SteadyOptions,
    pub n_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimSummary {
    pub label: String,
    pub chi: f64,
    pub n_cells: usize,
    pub scheme: Scheme,
    pub converged: bool,
    pub t: f64,
    pub steps: u64,
    pub residual: f64,
    pub residual_tol: f64,
    /// Extremes of `u` over the whole run, when it finished normally.
    pub u_min_seen: Option<f64>,
    pub u_max_seen: Option<f64>,
    pub measure: PatternMeasure,
    /// Why the run stopped early, when it did.
    pub failure: Option<String>,
}

pub struct SimRun {
    pub summary: SimSummary,
    pub state: FieldState,
    pub history: Vec<ResidualSample>,
    pub tracked: Vec<usize>,
}

/// Runs to a steady state. Horizon exhaustion and blow-up are reported in the
/// summary with the last good state; invalid input is an error.
pub fn simulate(spec: &SimSpec) -> Result<SimRun, CliError> {
    let opts = &spec.options;
    let (state, history, seen, failure) =
        match run_to_steady(&spec.params, &spec.grid, spec.initial.clone(), opts) {
            Ok(run) => (run.state, run.history, Some((run.u_min_seen, run.u_max_seen)), None),
            Err(e @ PdeError::NotConverged { .. }) => {
                let msg = e.to_string();
                let PdeError::NotConverged { history, state, .. } = e else { unreachable!() };
                (*state, history, None, Some(msg))
            }
            Err(e @ PdeError::NonFinite { .. }) => {
                let msg = e.to_string();
                let PdeError::NonFinite { last_good, .. } = e else { unreachable!() };
                (*last_good, Vec::new(), None, Some(msg))
            }
            Err(e) => return Err(e.into()),
        };
    let measure = measure_pattern(&spec.params, &spec.grid, &state, spec.n_max);
    let summary = SimSummary {
        label: spec.label.clone(),
        chi: spec.params.chi,
        n_cells: spec.grid.n_cells,
        scheme: opts.scheme,
        converged: failure.is_none(),
        t: state.t,
        steps: state.steps,
        residual: state.residual,
        residual_tol: opts.residual_tol,
        u_min_seen: seen.map(|s| s.0),
        u_max_seen: seen.map(|s| s.1),
        measure,
        failure,
    };
    Ok(SimRun { summary, state, history, tracked: opts.tracked_modes.clone() })
}

/// One thread per run; results keep the input order.
pub fn simulate_all(specs: &[SimSpec]) -> Result<Vec<SimRun>, CliError> {
    let results: Vec<Result<SimRun, CliError>> = thread::scope(|s| {
        let handles: Vec<_> = specs.iter().map(|spec| s.spawn(move || simulate(spec))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or(Err(CliError::Worker))).collect()
    });
    results.into_iter().collect()
}

/// Initial data described by the `initial` section.
pub fn initial_state(cfg: &ExperimentConfig, p: &ModelParams, grid: &Grid1D) -> FieldState {
    let ss = uniform_steady_state(p);
    match cfg.initial {
        InitialData::Random { rel } => FieldState::perturbed_uniform(grid, p, rel, cfg.seed),
        InitialData::Cosine { amplitude, wavenumber, v_amplitude } => FieldState::from_fn(grid, |x| {
            let c = (wavenumber * x).cos();
            (ss.u_bar + amplitude * c, ss.v_bar + v_amplitude * c)
        }),
        InitialData::Uniform => FieldState::uniform(grid, p),
    }
}

/// Snapshot `(x, u, v)`, time series `(t, residual, a_n...)` and a plot of `u`.
pub fn write_run(out: &mut OutputDir, prefix: &str, grid: &Grid1D, run: &SimRun) -> Result<(), CliError> {
    let rows: Vec<Vec<f64>> =
        (0..grid.n_cells).map(|j| vec![grid.x(j), run.state.u[j], run.state.v[j]]).collect();
    out.csv_numeric(&format!("{prefix}_snapshot.csv"), &["x", "u", "v"], &rows)?;

    let mut header = vec!["t".to_string(), "residual".to_string()];
    header.extend(run.tracked.iter().map(|n| format!("a_{n}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = run
        .history
        .iter()
        .map(|h| {
            let mut r = vec![num(h.t), num(h.residual)];
            r.extend(h.modes.iter().map(|a| num(*a)));
            r
        })
        .collect();
    out.csv(&format!("{prefix}_history.csv"), &header, &rows)?;

    let mut plot = Plot::new(format!("{}: u at t = {:.6}", run.summary.label, run.state.t), "x", "u");
    plot.series.push(Series::new("u", xy(grid, &run.state.u), Style::Line));
    if !run.summary.converged {
        plot.notes.push("not converged".to_string());
    }
    out.svg(&format!("{prefix}_u.svg"), &plot)
}

pub fn xy(grid: &Grid1D, f: &[f64]) -> Vec<(f64, f64)> {
    f.iter().enumerate().map(|(j, y)| (grid.x(j), *y)).collect()
}
