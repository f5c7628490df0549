//! Branches of stationary amplitudes against the sensitivity.

use chemopattern_core::amplitude::{
    bifurcation_branches, chi_s, eigenpair, quintic_landau, AmplitudeError, BifurcationReport, BranchKind,
    CriticalPoint, DiscriminantSample, ExpansionSetup,
};
use serde::Serialize;

use super::{Context, Finished};
use crate::error::CliError;
use crate::output::num;
use crate::svg::{Marker, Plot, Series, Shade, Style};

#[derive(Serialize)]
struct BifurcationResult<'a> {
    chi_lo: f64,
    chi_hi: f64,
    branches: &'a BifurcationReport,
    /// Why `chi_s` is missing, with the discriminant scan that failed.
    chi_s_error: Option<String>,
    discriminant_scan: Vec<DiscriminantSample>,
}

pub fn run(ctx: &mut Context) -> Result<Finished, CliError> {
    let cfg = ctx.config;
    let p = cfg.base_params();
    let cp = CriticalPoint::new(&p, cfg.mode.choice)?;
    let setup = match cfg.eps {
        Some(e) => ExpansionSetup::from_eps(e, &cp),
        None => ExpansionSetup::from_chi(ctx.resolved.chi, &cp),
    };
    let c = quintic_landau(&p, &cp, &setup, &eigenpair(&p, cp.k))?;
    let lo = cfg.bifurcation.chi_lo.unwrap_or(0.99 * cp.chi_c);
    let hi = cfg.bifurcation.chi_hi.unwrap_or(1.01 * cp.chi_c);
    let report = bifurcation_branches(&c, lo, hi, cfg.bifurcation.samples);
    let (chi_s_error, scan) = match chi_s(&c) {
        Ok(_) => (None, Vec::new()),
        Err(AmplitudeError::ChiSNotFound { reason, scan }) => (Some(reason.to_string()), scan),
        Err(e) => (Some(e.to_string()), Vec::new()),
    };

    let rows: Vec<Vec<String>> = report
        .points
        .iter()
        .map(|b| vec![num(b.chi), num(b.amplitude), (b.stable as u8).to_string(), kind(b.branch).to_string()])
        .collect();
    ctx.out.csv("bifurcation_branches.csv", &["chi", "amplitude", "stable", "branch"], &rows)?;
    if !scan.is_empty() {
        let rows: Vec<Vec<f64>> = scan.iter().map(|s| vec![s.chi, s.discriminant]).collect();
        ctx.out.csv_numeric("bifurcation_discriminant.csv", &["chi", "discriminant"], &rows)?;
    }
    ctx.out
        .svg("bifurcation.svg", &plot(&report, lo, hi, cfg.bifurcation.samples, chi_s_error.as_deref()))?;

    let result =
        BifurcationResult { chi_lo: lo, chi_hi: hi, branches: &report, chi_s_error, discriminant_scan: scan };
    let mut done = Finished::new(&result)?;
    done.metric("chi_c", report.chi_c);
    if let Some(s) = report.chi_s {
        done.metric("chi_s", s);
        done.metric("chi_c_minus_chi_s", report.chi_c - s);
    }
    done.summary.push(format!("chi_c = {:.6} ({:?})", report.chi_c, report.criticality));
    match (report.chi_s, &result.chi_s_error) {
        (Some(s), _) => done.summary.push(format!("chi_s = {s:.6}")),
        (None, Some(e)) => done.summary.push(format!("chi_s not found: {e}")),
        (None, None) => {}
    }
    Ok(done)
}

fn kind(b: BranchKind) -> &'static str {
    match b {
        BranchKind::Trivial => "trivial",
        BranchKind::Lower => "lower",
        BranchKind::Upper => "upper",
    }
}

fn plot(r: &BifurcationReport, lo: f64, hi: f64, samples: usize, missing: Option<&str>) -> Plot {
    let mut plot = Plot::new("Stationary amplitudes", "chi", "a = eps A");
    let step = (hi - lo) / (samples.max(2) - 1) as f64;
    let groups = [
        (BranchKind::Trivial, true, "uniform, stable", Style::Line, "#1f77b4"),
        (BranchKind::Trivial, false, "uniform, unstable", Style::Dashed, "#1f77b4"),
        (BranchKind::Upper, true, "pattern, stable", Style::Line, "#d62728"),
        (BranchKind::Upper, false, "pattern, unstable", Style::Dashed, "#d62728"),
        (BranchKind::Lower, true, "small branch, stable", Style::Line, "#2ca02c"),
        (BranchKind::Lower, false, "small branch, unstable", Style::Dashed, "#2ca02c"),
    ];
    for (branch, stable, name, style, color) in groups {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        let mut last: Option<f64> = None;
        for b in r.points.iter().filter(|b| b.branch == branch && b.stable == stable) {
            if let Some(prev) = last {
                if b.chi - prev > 1.5 * step {
                    pts.push((f64::NAN, f64::NAN));
                }
            }
            pts.push((b.chi, b.amplitude));
            last = Some(b.chi);
        }
        if !pts.is_empty() {
            plot.series.push(Series::new(name, pts, style).color(color));
        }
    }
    plot.markers.push(Marker { x: r.chi_c, label: format!("chi_c = {:.4}", r.chi_c) });
    if let Some(s) = r.chi_s {
        plot.markers.push(Marker { x: s, label: format!("chi_s = {s:.4}") });
    }
    if let Some((a, b)) = r.coexistence {
        plot.shades.push(Shade { x0: a, x1: b, label: "bistable window".into() });
    }
    if let Some(m) = missing {
        plot.notes.push(format!("chi_s not found: {m}"));
    }
    plot
}
