//! Two runs from cosine data of different size, checking that a pattern and
//! the uniform state are both stable at the same sensitivity.

use chemopattern_core::amplitude::{
    bifurcation_branches, eigenpair, quintic_landau, BranchKind, ExpansionSetup,
};
use serde::Serialize;

use super::{Context, Finished};
use crate::config::{ExperimentConfig, InitialData};
use crate::error::CliError;
use crate::report::{Bound, Check, ComparisonReport, ModeInfo};
use crate::sim::{initial_state, simulate_all, write_run, xy, SimSpec, SimSummary};
use crate::svg::{Plot, Series, Style};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Outcome {
    Pattern,
    Uniform,
    Undetermined,
}

#[derive(Serialize)]
struct Prediction {
    chi_c: f64,
    chi_s: Option<f64>,
    in_bistable_window: bool,
    /// Stable nonzero amplitude `a = eps A` of the quintic branch.
    pattern_amplitude: Option<f64>,
    /// Its contribution to the fundamental of `u - u_c`.
    pattern_fundamental: Option<f64>,
}

#[derive(Serialize)]
struct Run<'a> {
    initial_amplitude: f64,
    expected: Outcome,
    outcome: Outcome,
    summary: &'a SimSummary,
    comparison: ComparisonReport,
}

#[derive(Serialize)]
struct HysteresisResult<'a> {
    chi: f64,
    wavenumber: f64,
    prediction: Option<Prediction>,
    prediction_error: Option<String>,
    runs: Vec<Run<'a>>,
}

fn predict(cfg: &ExperimentConfig, chi: f64) -> Result<Prediction, CliError> {
    let p = cfg.base_params();
    let cp = chemopattern_core::amplitude::CriticalPoint::new(&p, cfg.mode.choice)?;
    let pair = eigenpair(&p, cp.k);
    let c = quintic_landau(&p, &cp, &ExpansionSetup::from_chi(chi, &cp), &pair)?;
    let r = bifurcation_branches(&c, chi, chi, 2);
    let upper = r.points.iter().find(|b| b.branch == BranchKind::Upper && b.stable).map(|b| b.amplitude);
    let in_window = r.chi_s.is_some_and(|s| s < chi) && chi < r.chi_c;
    Ok(Prediction {
        chi_c: r.chi_c,
        chi_s: r.chi_s,
        in_bistable_window: in_window,
        pattern_amplitude: upper,
        pattern_fundamental: upper.map(|a| a * pair.m),
    })
}

pub fn run(ctx: &mut Context) -> Result<Finished, CliError> {
    let cfg = ctx.config;
    let h = &cfg.hysteresis;
    let p = ctx.resolved.params;
    let grid = cfg.grid()?;
    let l = grid.l;
    let n_ic = h.wavenumber * l / std::f64::consts::PI;
    let tracked = if cfg.solver.tracked_modes.is_empty() {
        vec![n_ic.round().max(1.0) as usize]
    } else {
        cfg.solver.tracked_modes.clone()
    };
    let specs: Vec<SimSpec> = h
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, &amp)| {
            let mut c = cfg.clone();
            c.initial = InitialData::Cosine { amplitude: amp, wavenumber: h.wavenumber, v_amplitude: 0.0 };
            SimSpec {
                label: format!("run{i}: u0 = u_c + {amp} cos({} x)", h.wavenumber),
                params: p,
                grid,
                initial: initial_state(&c, &p, &grid),
                options: cfg.solver.steady_options(tracked.clone()),
                n_max: cfg.solver.n_max,
            }
        })
        .collect();
    let runs = simulate_all(&specs)?;
    for (i, r) in runs.iter().enumerate() {
        write_run(ctx.out, &format!("hysteresis_run{i}"), &grid, r)?;
    }
    let (prediction, prediction_error) = match predict(cfg, p.chi) {
        Ok(pr) => (Some(pr), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let expected = [Outcome::Pattern, Outcome::Uniform];
    let mut out_runs = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        let s = &r.summary;
        let m = &s.measure;
        let outcome = if !s.converged {
            Outcome::Undetermined
        } else if m.peak_to_trough > h.pattern_ptp {
            Outcome::Pattern
        } else if m.sup_distance < h.uniform_sup {
            Outcome::Uniform
        } else {
            Outcome::Undetermined
        };
        let mut checks = vec![Check::holds("converged", s.converged)];
        let (predicted, measured) = match expected[i] {
            Outcome::Pattern => {
                checks.push(Check::new("peak_to_trough", m.peak_to_trough, Bound::Above, h.pattern_ptp));
                let pf = prediction.as_ref().and_then(|p| p.pattern_fundamental).unwrap_or(f64::NAN);
                (pf, m.amplitude.abs())
            }
            _ => {
                checks.push(Check::new("sup_distance", m.sup_distance, Bound::Below, h.uniform_sup));
                (0.0, m.sup_distance)
            }
        };
        let comparison = ComparisonReport {
            label: s.label.clone(),
            order: None,
            predicted_mode: None,
            measured_mode: ModeInfo::from_n(m.dominant_mode, l),
            predicted_amplitude: predicted,
            measured_amplitude: measured,
            relative_amplitude_error: crate::report::relative_error(measured, predicted)
                .filter(|e| e.is_finite()),
            l2_error: None,
            sup_error: None,
            checks,
            pass: false,
        }
        .finish();
        out_runs.push(Run {
            initial_amplitude: h.amplitudes[i],
            expected: expected[i],
            outcome,
            summary: s,
            comparison,
        });
    }

    let mut plot = Plot::new(format!("Steady states at chi = {}", p.chi), "x", "u");
    for (i, r) in runs.iter().enumerate() {
        let style = if i == 0 { Style::Line } else { Style::Dashed };
        plot.series.push(Series::new(
            format!("u0 amplitude {}", h.amplitudes[i]),
            xy(&grid, &r.state.u),
            style,
        ));
    }
    ctx.out.svg("hysteresis.svg", &plot)?;

    let mut checks: Vec<Check> = Vec::new();
    for (i, r) in out_runs.iter().enumerate() {
        for c in &r.comparison.checks {
            checks.push(Check { name: format!("run{i}.{}", c.name), ..c.clone() });
        }
    }
    checks.push(Check::holds("outcomes_differ", out_runs[0].outcome != out_runs[1].outcome));
    let mut summary = Vec::new();
    let mut metrics = Vec::new();
    for (i, r) in out_runs.iter().enumerate() {
        let m = &r.summary.measure;
        summary.push(format!(
            "run{i} (amplitude {}): {:?}, peak-to-trough {:.4e}, sup |u - u_c| {:.4e}",
            r.initial_amplitude, r.outcome, m.peak_to_trough, m.sup_distance
        ));
        metrics.push((format!("run{i}_peak_to_trough"), m.peak_to_trough));
        metrics.push((format!("run{i}_sup_distance"), m.sup_distance));
        metrics.push((format!("run{i}_amplitude"), m.amplitude.abs()));
        metrics.push((format!("run{i}_dominant_mode"), m.dominant_mode as f64));
        metrics.push((format!("run{i}_t"), r.summary.t));
    }
    let result = HysteresisResult {
        chi: p.chi,
        wavenumber: h.wavenumber,
        prediction,
        prediction_error,
        runs: out_runs,
    };
    let mut done = Finished::new(&result)?;
    done.checks = checks;
    for (k, v) in metrics {
        done.metric(k, v);
    }
    if let Some(pr) = &result.prediction {
        done.metric("chi_c", pr.chi_c);
        if let Some(s) = pr.chi_s {
            done.metric("chi_s", s);
        }
        if let Some(a) = pr.pattern_fundamental {
            done.metric("predicted_pattern_fundamental", a);
        }
    }
    done.summary = summary;
    Ok(done)
}
