//! Cubic and quintic Stuart–Landau coefficients for both choices of base mode.

use chemopattern_core::amplitude::{
    chi_s, cubic_landau, eigenpair, quintic_landau, stationary_amplitude_cubic, stationary_amplitude_quintic,
    CriticalPoint, Criticality, ExpansionSetup, KernelGauge, LandauCoefficients, ModeChoice,
};
use chemopattern_core::stability::{chi_c, k_c};
use chemopattern_core::ModelParams;
use serde::Serialize;

use super::{Context, Finished};
use crate::config::Sweep;
use crate::error::CliError;
use crate::svg::{Plot, Series, Style};

#[derive(Serialize)]
struct Variant {
    choice: ModeChoice,
    critical: CriticalPoint,
    setup: ExpansionSetup,
    sigma: f64,
    l_cubic: f64,
    sigma_tilde: f64,
    l_tilde: f64,
    q_tilde: f64,
    sigma_bar: f64,
    l_bar: f64,
    q_bar: f64,
    criticality: Criticality,
    /// `sqrt(sigma / L)`, supercritical only.
    amplitude_cubic: Option<f64>,
    /// Stable nonzero root of the quintic equation.
    amplitude_quintic: Option<f64>,
    /// Unstable nonzero root of the quintic equation.
    threshold_amplitude_quintic: Option<f64>,
    chi_s: Option<f64>,
    /// Set when the expansion runs on a Neumann mode instead of `k_c`.
    substitution: Option<String>,
    two_path_discrepancy: f64,
    /// `(|L_1 rho|, |L_1ᵀ psi|)` at the base sensitivity.
    nullity: (f64, f64),
}

#[derive(Serialize)]
struct GaugeRow {
    gauge: KernelGauge,
    sigma_bar: f64,
    l_bar: f64,
    q_bar: f64,
}

#[derive(Clone, Copy, Serialize)]
struct SweepRow {
    mu: f64,
    chi_c: f64,
    k_c: f64,
    sigma: f64,
    l_cubic: f64,
    supercritical: bool,
}

#[derive(Serialize)]
struct LandauResult {
    choice: ModeChoice,
    primary: Variant,
    /// Both base-mode choices; an entry is an error message when it fails.
    variants: Vec<Result<Variant, String>>,
    /// Combined coefficients under each normalization of the kernel component.
    gauges: Vec<GaugeRow>,
    coefficients: LandauCoefficients,
    mu_sweep: Option<Vec<SweepRow>>,
    mu_sweep_sign_changes: Option<usize>,
}

fn setup_for(ctx: &Context, cp: &CriticalPoint) -> ExpansionSetup {
    match ctx.config.eps {
        Some(e) => ExpansionSetup::from_eps(e, cp),
        None => ExpansionSetup::from_chi(ctx.resolved.chi, cp),
    }
}

fn coefficients(ctx: &Context, choice: ModeChoice) -> Result<LandauCoefficients, CliError> {
    let p = ctx.config.base_params();
    let cp = CriticalPoint::new(&p, choice)?;
    let setup = setup_for(ctx, &cp);
    Ok(quintic_landau(&p, &cp, &setup, &eigenpair(&p, cp.k))?)
}

fn variant(p: &ModelParams, c: &LandauCoefficients) -> Variant {
    let q = stationary_amplitude_quintic(c.sigma_bar, c.l_bar, c.q_bar);
    let substitution = match c.critical.choice {
        ModeChoice::FirstAdmissible => match (chi_c(p), k_c(p)) {
            (Ok(cc), Ok(kc)) => Some(format!(
                "k_c = {kc} replaced by the Neumann mode n0 = {} with k = {}; chi_c = {cc} replaced by chi_min = {}",
                c.critical.n.unwrap_or(0),
                c.critical.k,
                c.critical.chi_c
            )),
            _ => Some(format!(
                "no finite k_c; expansion on the Neumann mode n0 = {} with k = {}",
                c.critical.n.unwrap_or(0),
                c.critical.k
            )),
        },
        ModeChoice::Continuous => None,
    };
    Variant {
        choice: c.critical.choice,
        critical: c.critical,
        setup: c.setup,
        sigma: c.sigma,
        l_cubic: c.l_cubic,
        sigma_tilde: c.sigma_tilde,
        l_tilde: c.l_tilde,
        q_tilde: c.q_tilde,
        sigma_bar: c.sigma_bar,
        l_bar: c.l_bar,
        q_bar: c.q_bar,
        criticality: c.criticality,
        amplitude_cubic: stationary_amplitude_cubic(c.sigma, c.l_cubic).ok(),
        amplitude_quintic: q.stable,
        threshold_amplitude_quintic: q.unstable,
        chi_s: chi_s(c).ok(),
        substitution,
        two_path_discrepancy: c.two_path_discrepancy,
        nullity: c.eigenpair.nullity(p, c.critical.chi_c),
    }
}

fn mu_sweep(p: &ModelParams, sw: &Sweep, eps: f64) -> Result<Vec<SweepRow>, CliError> {
    let n = sw.samples;
    (0..n)
        .map(|i| {
            let mu = sw.from + (sw.to - sw.from) * i as f64 / (n - 1) as f64;
            let q = p.with_mu(mu);
            let cp = CriticalPoint::continuous(&q)?;
            let c = cubic_landau(&q, &cp, &ExpansionSetup::from_eps(eps, &cp), &eigenpair(&q, cp.k))?;
            Ok(SweepRow {
                mu,
                chi_c: cp.chi_c,
                k_c: cp.k,
                sigma: c.sigma,
                l_cubic: c.l_cubic,
                supercritical: c.criticality == Criticality::Supercritical,
            })
        })
        .collect()
}

pub fn run(ctx: &mut Context) -> Result<Finished, CliError> {
    let cfg = ctx.config;
    let p = cfg.base_params();
    let choice = cfg.mode.choice;
    let main = coefficients(ctx, choice)?;
    let primary = variant(&p, &main);
    let variants = [ModeChoice::Continuous, ModeChoice::FirstAdmissible]
        .into_iter()
        .map(|ch| coefficients(ctx, ch).map(|c| variant(&p, &c)).map_err(|e| e.to_string()))
        .collect();

    let pair = eigenpair(&p, main.critical.k);
    let mut gauges = Vec::new();
    for g in [
        KernelGauge::OrthogonalToRho,
        KernelGauge::ZeroFirst,
        KernelGauge::ZeroSecond,
        KernelGauge::OrthogonalToPsi,
    ] {
        let c = quintic_landau(&p, &main.critical, &main.setup.with_kernel(g), &pair)?;
        gauges.push(GaugeRow { gauge: g, sigma_bar: c.sigma_bar, l_bar: c.l_bar, q_bar: c.q_bar });
    }
    let spread = gauges
        .iter()
        .flat_map(|g| [rel(g.sigma_bar, main.sigma_bar), rel(g.l_bar, main.l_bar), rel(g.q_bar, main.q_bar)])
        .fold(0.0, f64::max);

    let sweep = match &cfg.landau.mu_sweep {
        Some(sw) => Some(mu_sweep(&p, sw, cfg.eps.unwrap_or(0.0))?),
        None => None,
    };
    let changes =
        sweep.as_ref().map(|s| s.windows(2).filter(|w| w[0].supercritical != w[1].supercritical).count());
    if let Some(rows) = &sweep {
        let table: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r.mu, r.chi_c, r.k_c, r.sigma, r.l_cubic, r.supercritical as u8 as f64])
            .collect();
        ctx.out.csv_numeric(
            "landau_mu_sweep.csv",
            &["mu", "chi_c", "k_c", "sigma", "l_cubic", "supercritical"],
            &table,
        )?;
        let mut plot = Plot::new("Cubic Landau coefficient along mu", "mu", "L");
        plot.zero_line = true;
        plot.series.push(Series::new("L(mu)", rows.iter().map(|r| (r.mu, r.l_cubic)).collect(), Style::Line));
        plot.notes.push(format!("criticality changes {} time(s)", changes.unwrap_or(0)));
        ctx.out.svg("landau_mu_sweep.svg", &plot)?;
    }

    let result = LandauResult {
        choice,
        primary,
        variants,
        gauges,
        coefficients: main.clone(),
        mu_sweep: sweep,
        mu_sweep_sign_changes: changes,
    };
    let mut done = Finished::new(&result)?;
    let v = &result.primary;
    for (name, x) in [
        ("chi_c", v.critical.chi_c),
        ("k", v.critical.k),
        ("eps_sq", v.setup.eps_sq),
        ("sigma", v.sigma),
        ("l_cubic", v.l_cubic),
        ("sigma_tilde", v.sigma_tilde),
        ("l_tilde", v.l_tilde),
        ("q_tilde", v.q_tilde),
        ("sigma_bar", v.sigma_bar),
        ("l_bar", v.l_bar),
        ("q_bar", v.q_bar),
        ("supercritical", (v.criticality == Criticality::Supercritical) as u8 as f64),
        ("two_path_discrepancy", v.two_path_discrepancy),
        ("nullity_rho", v.nullity.0),
        ("nullity_psi", v.nullity.1),
        ("gauge_spread", spread),
    ] {
        done.metric(name, x);
    }
    if let Some(a) = v.amplitude_cubic {
        done.metric("amplitude_cubic", a);
    }
    if let Some(a) = v.amplitude_quintic {
        done.metric("amplitude_quintic", a);
    }
    let amplitude = match v.criticality {
        Criticality::Supercritical => v.amplitude_cubic,
        Criticality::Subcritical => v.amplitude_quintic,
    };
    if let Some(a) = amplitude {
        done.metric("amplitude", a);
    }
    if let Some(s) = v.chi_s {
        done.metric("chi_s", s);
    }
    if let Some(c) = changes {
        done.metric("mu_sweep_sign_changes", c as f64);
    }
    done.summary.push(format!(
        "{:?} base: chi_c = {:.6}, k = {:.6}, {:?}",
        choice, v.critical.chi_c, v.critical.k, v.criticality
    ));
    done.summary.push(format!("sigma = {:.6}, L = {:.6}", v.sigma, v.l_cubic));
    done.summary
        .push(format!("sigma_bar = {:.6}, L_bar = {:.6}, Q_bar = {:.6}", v.sigma_bar, v.l_bar, v.q_bar));
    if let Some(a) = amplitude {
        done.summary.push(format!("stationary amplitude = {a:.6}"));
    }
    if let Some(s) = &v.substitution {
        done.summary.push(s.clone());
    }
    Ok(done)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}
