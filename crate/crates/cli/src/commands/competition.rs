//! Two-mode competition: coefficients, equilibria, basins and PDE runs from
//! mixed-mode data.

use std::thread;

use chemopattern_core::competition::{
    competition_coefficients, equilibria, integrate_amplitudes, reconstruct_two_mode, BasinLabel,
    CompetitionCoefficients, EquilibriumSet, IntegrationOptions, Trajectory,
};
use chemopattern_core::pde::FieldState;
use chemopattern_core::stability::{admissible_unstable_modes, chi_c, most_unstable_mode};
use chemopattern_core::ModelParams;
use serde::Serialize;

use super::{Context, Finished};
use crate::error::CliError;
use crate::output::num;
use crate::report::{relative_error, Check, ComparisonReport, ModeInfo};
use crate::sim::{simulate_all, write_run, SimSpec, SimSummary};
use crate::svg::{Cell, Plot, Series, Style};

#[derive(Serialize)]
struct StartResult<'a> {
    start: [f64; 2],
    end: [f64; 2],
    t_end: f64,
    stationary: bool,
    attractor: BasinLabel,
    pde: Option<PdeResult<'a>>,
}

/// Reconstructed two-mode data clipped at zero, with the number of clipped values.
fn nonnegative(mut u: Vec<f64>, mut v: Vec<f64>) -> (FieldState, usize) {
    let mut clipped = 0;
    for x in u.iter_mut().chain(v.iter_mut()) {
        if *x < 0.0 {
            *x = 0.0;
            clipped += 1;
        }
    }
    (FieldState::new(u, v), clipped)
}

#[derive(Serialize)]
struct PdeResult<'a> {
    /// Nodal values of the reconstructed data raised to zero.
    clipped_values: usize,
    summary: &'a SimSummary,
    comparison: ComparisonReport,
}

#[derive(Serialize)]
struct BasinResult {
    a1: Vec<f64>,
    a2: Vec<f64>,
    /// Row-major, `labels[i * a2.len() + j]` starts at `(a1[i], a2[j])`.
    labels: Vec<BasinLabel>,
    errors: usize,
}

#[derive(Serialize)]
struct CompetitionResult<'a> {
    eps: f64,
    chi: f64,
    auto_selected: bool,
    coefficients: &'a CompetitionCoefficients,
    equilibria: &'a EquilibriumSet,
    starts: Vec<StartResult<'a>>,
    basin: BasinResult,
}

fn label_name(l: BasinLabel) -> &'static str {
    match l {
        BasinLabel::Trivial => "trivial",
        BasinLabel::ModeOne => "mode-one",
        BasinLabel::ModeTwo => "mode-two",
        BasinLabel::Mixed => "mixed",
        BasinLabel::Undecided => "undecided",
    }
}

fn label_code(l: BasinLabel) -> f64 {
    match l {
        BasinLabel::Trivial => 0.0,
        BasinLabel::ModeOne => 1.0,
        BasinLabel::ModeTwo => 2.0,
        BasinLabel::Mixed => 3.0,
        BasinLabel::Undecided => -1.0,
    }
}

fn label_fill(l: BasinLabel) -> &'static str {
    match l {
        BasinLabel::Trivial => "#eeeeee",
        BasinLabel::ModeOne => "#c6dbef",
        BasinLabel::ModeTwo => "#fdd0a2",
        BasinLabel::Mixed => "#c7e9c0",
        BasinLabel::Undecided => "#bdbdbd",
    }
}

/// The admissible unstable mode nearest the most unstable wavenumber, then
/// the next nearest.
fn auto_select(p: &ModelParams, eps: f64) -> Result<(f64, f64), CliError> {
    let chi = chi_c(p)? * (1.0 + eps * eps);
    let km = most_unstable_mode(p, eps)?.k_m_sq.sqrt();
    let mut modes = admissible_unstable_modes(&p.with_chi(chi));
    modes.sort_by(|a, b| (a.k - km).abs().total_cmp(&(b.k - km).abs()).then(a.n.cmp(&b.n)));
    match modes.as_slice() {
        [a, b, ..] => Ok((a.k, b.k)),
        _ => Err(CliError::Unsupported {
            what: "competition",
            reason: format!("fewer than two admissible unstable modes at chi = {chi}"),
        }),
    }
}

fn basin(cc: &CompetitionCoefficients, n: usize, max: f64, opts: &IntegrationOptions) -> BasinResult {
    let axis: Vec<f64> = (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect();
    let workers = thread::available_parallelism().map_or(1, |w| w.get()).min(n);
    let chunk = n.div_ceil(workers);
    let rows: Vec<Vec<Option<BasinLabel>>> = thread::scope(|s| {
        let handles: Vec<_> = axis
            .chunks(chunk)
            .map(|a1s| {
                let axis = &axis;
                s.spawn(move || {
                    a1s.iter()
                        .flat_map(|&x| {
                            axis.iter().map(move |&y| {
                                integrate_amplitudes(cc, [x, y], opts).ok().map(|t| t.attractor)
                            })
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("basin worker")).collect()
    });
    let flat: Vec<Option<BasinLabel>> = rows.into_iter().flatten().collect();
    let errors = flat.iter().filter(|l| l.is_none()).count();
    BasinResult {
        a1: axis.clone(),
        a2: axis,
        labels: flat.into_iter().map(|l| l.unwrap_or(BasinLabel::Undecided)).collect(),
        errors,
    }
}

pub fn run(ctx: &mut Context) -> Result<Finished, CliError> {
    let cfg = ctx.config;
    let cs = &cfg.competition;
    let p0 = cfg.base_params();
    let chi_c0 = chi_c(&p0)?;
    let eps = match cfg.eps {
        Some(e) => e,
        None => {
            let e2 = ctx.resolved.chi / chi_c0 - 1.0;
            if !(e2 > 0.0) {
                return Err(CliError::Unsupported {
                    what: "competition",
                    reason: format!("needs chi above chi_c = {chi_c0}"),
                });
            }
            e2.sqrt()
        }
    };
    let chi = chi_c0 * (1.0 + eps * eps);
    let (k1, k2, auto_selected) = match (cs.k1, cs.k2) {
        (Some(a), Some(b)) => (a, b, false),
        (None, None) => {
            let (a, b) = auto_select(&p0, eps)?;
            (a, b, true)
        }
        _ => {
            return Err(CliError::Config(vec![crate::config::FieldError {
                path: "competition.k2".into(),
                message: "set both `k1` and `k2` or neither".into(),
            }]))
        }
    };
    let cc = competition_coefficients(&p0, k1, k2, eps)?;
    let eqs = equilibria(&cc);
    let opts = IntegrationOptions { t_max: cs.t_max, ..IntegrationOptions::default() };

    let trajectories: Vec<Trajectory> =
        cs.starts.iter().map(|s| integrate_amplitudes(&cc, *s, &opts)).collect::<Result<_, _>>()?;
    for (i, t) in trajectories.iter().enumerate() {
        let rows: Vec<Vec<f64>> = t.samples.iter().map(|s| vec![s.t, s.a1, s.a2]).collect();
        ctx.out.csv_numeric(&format!("competition_trajectory{i}.csv"), &["t", "a1", "a2"], &rows)?;
    }
    let map = basin(&cc, cs.basin_n, cs.basin_max, &IntegrationOptions { record: false, ..opts });

    // PDE runs from the same starts.
    let p = p0.with_chi(chi);
    let grid = cfg.grid()?;
    let l = grid.l;
    let nodes = grid.nodes();
    let n_of = |k: f64| ModeInfo::from_k(k, l).n.map(|n| n as usize);
    let tracked: Vec<usize> = if cfg.solver.tracked_modes.is_empty() {
        [n_of(k1), n_of(k2)].into_iter().flatten().collect()
    } else {
        cfg.solver.tracked_modes.clone()
    };
    let mut clipped = Vec::new();
    let runs = if cs.simulate {
        let specs: Vec<SimSpec> = cs
            .starts
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let f = reconstruct_two_mode(&p, &cc, *s, eps, &nodes);
                let (initial, n) = nonnegative(f.u, f.v);
                clipped.push(n);
                SimSpec {
                    label: format!("start{i}: (A1, A2) = ({}, {})", s[0], s[1]),
                    params: p,
                    grid,
                    initial,
                    options: cfg.solver.steady_options(tracked.clone()),
                    n_max: cfg.solver.n_max,
                }
            })
            .collect();
        simulate_all(&specs)?
    } else {
        Vec::new()
    };
    for (i, r) in runs.iter().enumerate() {
        write_run(ctx.out, &format!("competition_run{i}"), &grid, r)?;
    }

    // Tables and plots.
    let table = [
        ("k1", cc.k1),
        ("k2", cc.k2),
        ("m1", cc.m1),
        ("m2", cc.m2),
        ("sigma1", cc.sigma1),
        ("l1", cc.l1),
        ("omega1", cc.omega1),
        ("sigma2", cc.sigma2),
        ("l2", cc.l2),
        ("omega2", cc.omega2),
    ];
    let rows: Vec<Vec<String>> = table.iter().map(|(n, v)| vec![n.to_string(), num(*v)]).collect();
    ctx.out.csv("competition_coefficients.csv", &["name", "value"], &rows)?;
    let rows: Vec<Vec<String>> = eqs
        .points
        .iter()
        .map(|e| {
            vec![
                label_name(e.label).to_string(),
                num(e.a1),
                num(e.a2),
                num(e.eigenvalues.0.re),
                num(e.eigenvalues.0.im),
                num(e.eigenvalues.1.re),
                num(e.eigenvalues.1.im),
                serde_json::to_value(e.class)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
            ]
        })
        .collect();
    ctx.out.csv(
        "competition_equilibria.csv",
        &["label", "a1", "a2", "eig1_re", "eig1_im", "eig2_re", "eig2_im", "class"],
        &rows,
    )?;
    let mut rows = Vec::with_capacity(map.labels.len());
    for (i, x) in map.a1.iter().enumerate() {
        for (j, y) in map.a2.iter().enumerate() {
            rows.push(vec![num(*x), num(*y), label_name(map.labels[i * map.a2.len() + j]).to_string()]);
        }
    }
    ctx.out.csv("competition_basin.csv", &["a1", "a2", "label"], &rows)?;
    ctx.out.svg("competition_phase.svg", &phase_plot(&cc, &eqs, &map, &trajectories))?;

    // Assemble per-start results.
    let mut starts = Vec::new();
    let mut checks = Vec::new();
    for (i, t) in trajectories.iter().enumerate() {
        let pde = runs.get(i).map(|r| {
            let s = &r.summary;
            let m = &s.measure;
            let target = match t.attractor {
                BasinLabel::ModeOne => {
                    Some((cc.k1, eqs.find(BasinLabel::ModeOne).map_or(f64::NAN, |e| e.a1) * cc.m1))
                }
                BasinLabel::ModeTwo => {
                    Some((cc.k2, eqs.find(BasinLabel::ModeTwo).map_or(f64::NAN, |e| e.a2) * cc.m2))
                }
                _ => None,
            };
            let measured_mode = ModeInfo::from_n(m.dominant_mode, l);
            let mut c = vec![Check::holds("converged", s.converged)];
            if let Some((k, _)) = target {
                c.push(Check::holds("mode_match", ModeInfo::from_k(k, l).n == measured_mode.n));
            }
            let predicted_amplitude = target.map_or(f64::NAN, |(_, a)| eps * a);
            let comparison = ComparisonReport {
                label: s.label.clone(),
                order: Some(1),
                predicted_mode: target.map(|(k, _)| ModeInfo::from_k(k, l)),
                measured_mode,
                predicted_amplitude,
                measured_amplitude: m.amplitude.abs(),
                relative_amplitude_error: relative_error(m.amplitude.abs(), predicted_amplitude)
                    .filter(|e| e.is_finite()),
                l2_error: None,
                sup_error: None,
                checks: c,
                pass: false,
            }
            .finish();
            for ch in &comparison.checks {
                checks.push(Check { name: format!("start{i}.{}", ch.name), ..ch.clone() });
            }
            PdeResult { clipped_values: clipped[i], summary: s, comparison }
        });
        starts.push(StartResult {
            start: cs.starts[i],
            end: t.end,
            t_end: t.t_end,
            stationary: t.stationary,
            attractor: t.attractor,
            pde,
        });
    }

    let result = CompetitionResult {
        eps,
        chi,
        auto_selected,
        coefficients: &cc,
        equilibria: &eqs,
        starts,
        basin: map,
    };
    let mut done = Finished::new(&result)?;
    done.checks = checks;
    done.metric("eps", eps);
    done.metric("chi", chi);
    for (n, v) in table {
        done.metric(n, v);
    }
    for e in &eqs.points {
        let key = label_name(e.label).replace('-', "_");
        done.metric(format!("eq_{key}_a1"), e.a1);
        done.metric(format!("eq_{key}_a2"), e.a2);
        done.metric(format!("eq_{key}_stable"), e.class.is_stable() as u8 as f64);
    }
    for (i, s) in result.starts.iter().enumerate() {
        done.metric(format!("start{i}_end_a1"), s.end[0]);
        done.metric(format!("start{i}_end_a2"), s.end[1]);
        done.metric(format!("start{i}_attractor"), label_code(s.attractor));
        if let Some(pde) = &s.pde {
            let m = &pde.summary.measure;
            done.metric(format!("start{i}_pde_dominant_k"), m.dominant_wavenumber);
            done.metric(format!("start{i}_pde_amplitude"), m.amplitude.abs());
            done.metric(format!("start{i}_pde_clipped_values"), pde.clipped_values as f64);
        }
    }
    done.summary.push(format!("modes k1 = {k1}, k2 = {k2}, eps = {eps}"));
    done.summary.push(format!(
        "sigma1 = {:.6}, L1 = {:.6}, Omega1 = {:.6}; sigma2 = {:.6}, L2 = {:.6}, Omega2 = {:.6}",
        cc.sigma1, cc.l1, cc.omega1, cc.sigma2, cc.l2, cc.omega2
    ));
    for e in &eqs.points {
        done.summary.push(format!(
            "equilibrium {} ({:.6}, {:.6}): {:?}",
            label_name(e.label),
            e.a1,
            e.a2,
            e.class
        ));
    }
    for (i, s) in result.starts.iter().enumerate() {
        let mut line = format!(
            "start{i} ({}, {}) -> {} ({:.6}, {:.6})",
            s.start[0],
            s.start[1],
            label_name(s.attractor),
            s.end[0],
            s.end[1]
        );
        if let Some(pde) = &s.pde {
            let m = &pde.summary.measure;
            line.push_str(&format!(
                "; PDE dominant k = {:.4} (n = {})",
                m.dominant_wavenumber, m.dominant_mode
            ));
            if pde.clipped_values > 0 {
                line.push_str(&format!(", {} negative initial values clipped", pde.clipped_values));
            }
        }
        done.summary.push(line);
    }
    Ok(done)
}

fn phase_plot(
    cc: &CompetitionCoefficients,
    eqs: &EquilibriumSet,
    map: &BasinResult,
    trajs: &[Trajectory],
) -> Plot {
    let mut plot = Plot::new(format!("Amplitude plane, k1 = {}, k2 = {}", cc.k1, cc.k2), "A1", "A2");
    let n2 = map.a2.len();
    let half = |v: &[f64], i: usize| -> (f64, f64) {
        let h = if v.len() > 1 { 0.5 * (v[1] - v[0]) } else { 0.5 };
        (v[i] - h, v[i] + h)
    };
    let mut seen = Vec::new();
    for i in 0..map.a1.len() {
        for j in 0..n2 {
            let l = map.labels[i * n2 + j];
            let (x0, x1) = half(&map.a1, i);
            let (y0, y1) = half(&map.a2, j);
            plot.cells.push(Cell { x0, x1, y0, y1, fill: label_fill(l) });
            if !seen.contains(&l) {
                seen.push(l);
            }
        }
    }
    for l in seen {
        plot.swatches.push((format!("basin: {}", label_name(l)), label_fill(l)));
    }
    for (i, t) in trajs.iter().enumerate() {
        let pts = t.samples.iter().map(|s| (s.a1, s.a2)).collect();
        plot.series.push(Series::new(format!("trajectory {i}"), pts, Style::Line));
    }
    let stable: Vec<(f64, f64)> =
        eqs.points.iter().filter(|e| e.class.is_stable()).map(|e| (e.a1, e.a2)).collect();
    let unstable: Vec<(f64, f64)> =
        eqs.points.iter().filter(|e| !e.class.is_stable()).map(|e| (e.a1, e.a2)).collect();
    plot.series.push(Series::new("stable equilibria", stable, Style::Dots).color("#000000"));
    plot.series.push(Series::new("unstable equilibria", unstable, Style::Dots).color("#7f7f7f"));
    plot
}
