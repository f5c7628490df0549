//! Dispersion relation, unstable band and admissible modes.

use chemopattern_core::amplitude::ModeChoice;
use chemopattern_core::stability::{
    dispersion_curve, dispersion_h, dispersion_report, lambda_plus, mode_wavenumber, DispersionReport,
    DispersionSample,
};
use serde::Serialize;

use super::{Context, Finished};
use crate::error::CliError;
use crate::output::num;
use crate::svg::{Marker, Plot, Series, Style};

#[derive(Serialize)]
struct StabilityResult<'a> {
    report: &'a DispersionReport,
    k_sq_max: f64,
    /// `h(k_c²)`, zero exactly at threshold.
    h_at_k_c_sq: Option<f64>,
    modes: Vec<ModeRow>,
}

#[derive(Clone, Copy, Serialize)]
struct ModeRow {
    n: u32,
    k: f64,
    k_sq: f64,
    re_lambda_plus: f64,
    unstable: bool,
}

pub fn run(ctx: &mut Context) -> Result<Finished, CliError> {
    let cfg = ctx.config;
    let p = ctx.resolved.params;
    let eps = match cfg.mode.choice {
        ModeChoice::Continuous if p.mu > 0.0 => ctx.resolved.eps,
        _ => None,
    };
    let rep = dispersion_report(&p, eps)?;
    let k_sq_max = cfg.stability.k_sq_max.unwrap_or_else(|| {
        let kc = rep.k_c_sq.unwrap_or(1.0);
        let edge = rep.band.map_or(0.0, |b| b.k2_sq);
        (2.5 * kc).max(1.5 * edge).max(1.0)
    });
    let curve = dispersion_curve(&p, k_sq_max, cfg.stability.samples);
    let l = p.domain_length;
    let modes: Vec<ModeRow> = (1..)
        .map(|n| (n, mode_wavenumber(n, l)))
        .take_while(|(_, k)| k * k <= k_sq_max)
        .map(|(n, k)| {
            let re = lambda_plus(k * k, &p);
            ModeRow { n, k, k_sq: k * k, re_lambda_plus: re, unstable: re > 0.0 }
        })
        .collect();

    let rows: Vec<Vec<f64>> = curve.iter().map(|s| vec![s.k_sq, s.g, s.h, s.re_lambda_plus]).collect();
    ctx.out.csv_numeric("stability_dispersion.csv", &["k_sq", "g", "h", "re_lambda_plus"], &rows)?;
    let rows: Vec<Vec<String>> = modes
        .iter()
        .map(|m| {
            vec![
                m.n.to_string(),
                num(m.k),
                num(m.k_sq),
                num(m.re_lambda_plus),
                (m.unstable as u8).to_string(),
            ]
        })
        .collect();
    ctx.out.csv("stability_modes.csv", &["n", "k", "k_sq", "re_lambda_plus", "unstable"], &rows)?;
    ctx.out.svg("stability_h.svg", &h_plot(&rep, &curve))?;
    ctx.out.svg("stability_growth.svg", &growth_plot(&rep, &curve, &modes))?;

    let h_at_k_c_sq = rep.k_c_sq.map(|k| dispersion_h(k, &p));
    let result = StabilityResult { report: &rep, k_sq_max, h_at_k_c_sq, modes: modes.clone() };
    let mut done = Finished::new(&result)?;
    done.metric("chi", rep.chi);
    done.metric("chi_min", rep.chi_min);
    done.metric("n0", rep.n0 as f64);
    done.metric("k_min", mode_wavenumber(rep.n0, l));
    done.metric("h_min", rep.h_min);
    if let (Some(c), Some(k)) = (rep.chi_c, rep.k_c_sq) {
        done.metric("chi_c", c);
        done.metric("k_c_sq", k);
        done.metric("k_c", k.sqrt());
    }
    if let Some(h) = h_at_k_c_sq {
        done.metric("h_at_k_c_sq", h);
    }
    if let Some(b) = rep.band {
        done.metric("band_k1_sq", b.k1_sq);
        done.metric("band_k2_sq", b.k2_sq);
    }
    if let Some(m) = &rep.most_unstable {
        done.metric("k_m", m.k_m_sq.sqrt());
    }
    let unstable: Vec<&ModeRow> = modes.iter().filter(|m| m.unstable).collect();
    done.metric("n_unstable_modes", unstable.len() as f64);
    for m in &unstable {
        done.metric(format!("unstable_n{}", m.n), 1.0);
    }

    done.summary.push(format!("chi = {}", rep.chi));
    if let (Some(c), Some(k)) = (rep.chi_c, rep.k_c_sq) {
        done.summary.push(format!("chi_c = {c:.6}, k_c = {:.6}", k.sqrt()));
    }
    done.summary.push(format!("chi_min = {:.6} at n0 = {}", rep.chi_min, rep.n0));
    match rep.band {
        Some(b) => done.summary.push(format!("unstable band k² in ({:.6}, {:.6})", b.k1_sq, b.k2_sq)),
        None => done.summary.push("unstable band is empty".into()),
    }
    let ks: Vec<String> = unstable.iter().map(|m| format!("{} (k = {:.4})", m.n, m.k)).collect();
    done.summary.push(format!("unstable admissible modes: [{}]", ks.join(", ")));
    Ok(done)
}

fn band_markers(rep: &DispersionReport, plot: &mut Plot) {
    match rep.band {
        Some(b) => {
            plot.markers.push(Marker { x: b.k1_sq, label: "k1²".into() });
            plot.markers.push(Marker { x: b.k2_sq, label: "k2²".into() });
        }
        None => plot.notes.push("empty unstable band".into()),
    }
}

fn h_plot(rep: &DispersionReport, curve: &[DispersionSample]) -> Plot {
    let mut plot = Plot::new(format!("h(k²) at chi = {:.6}", rep.chi), "k²", "h");
    plot.zero_line = true;
    plot.series.push(Series::new("h(k²)", curve.iter().map(|s| (s.k_sq, s.h)).collect(), Style::Line));
    if let Some(k) = rep.k_c_sq {
        plot.markers.push(Marker { x: k, label: "k_c²".into() });
    }
    band_markers(rep, &mut plot);
    plot
}

fn growth_plot(rep: &DispersionReport, curve: &[DispersionSample], modes: &[ModeRow]) -> Plot {
    let mut plot = Plot::new(format!("Re λ⁺(k²) at chi = {:.6}", rep.chi), "k²", "Re λ⁺");
    plot.zero_line = true;
    plot.series.push(Series::new(
        "Re λ⁺",
        curve.iter().map(|s| (s.k_sq, s.re_lambda_plus)).collect(),
        Style::Line,
    ));
    let pick = |unstable: bool| -> Vec<(f64, f64)> {
        modes.iter().filter(|m| m.unstable == unstable).map(|m| (m.k_sq, m.re_lambda_plus)).collect()
    };
    plot.series.push(Series::new("unstable modes n π/l", pick(true), Style::Dots).color("#d62728"));
    plot.series.push(Series::new("stable modes", pick(false), Style::Dots).color("#9e9e9e"));
    band_markers(rep, &mut plot);
    plot
}
