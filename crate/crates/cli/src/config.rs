//! Experiment configuration: TOML files with dotted sections and
//! `key=value` overrides from the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use chemopattern_core::amplitude::{CriticalPoint, ModeChoice};
use chemopattern_core::pde::{Grid1D, Scheme, SteadyOptions, MIN_NODES};
use chemopattern_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::presets;

/// The experiment a config describes; the command line picks the one that runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Stability,
    Landau,
    Bifurcation,
    Competition,
    Simulate,
    Compare,
    Hysteresis,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Stability,
        Scenario::Landau,
        Scenario::Bifurcation,
        Scenario::Competition,
        Scenario::Simulate,
        Scenario::Compare,
        Scenario::Hysteresis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Stability => "stability",
            Scenario::Landau => "landau",
            Scenario::Bifurcation => "bifurcation",
            Scenario::Competition => "competition",
            Scenario::Simulate => "simulate",
            Scenario::Compare => "compare",
            Scenario::Hysteresis => "hysteresis",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Model constants. `chi` is optional here because it may come from `eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub d1: f64,
    pub d2: f64,
    pub mu: f64,
    pub u_c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub domain_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    /// Base point of the expansion and of the `eps` to `chi` conversion.
    pub choice: ModeChoice,
}

impl Default for ModeSection {
    fn default() -> Self {
        ModeSection { choice: ModeChoice::Continuous }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Number of grid nodes, boundaries included.
    pub n_cells: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n_cells: 512 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Rk4,
    SemiImplicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub scheme: SchemeKind,
    /// Fixed step of the semi-implicit scheme.
    pub dt: f64,
    /// Fraction of the explicit stability bound used by RK4.
    pub courant: f64,
    pub residual_tol: f64,
    pub t_max: f64,
    pub check_every: u64,
    /// Cosine modes recorded in the time series; empty picks the predicted ones.
    pub tracked_modes: Vec<usize>,
    /// Highest cosine mode used to measure patterns.
    pub n_max: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SteadyOptions::default();
        SolverSection {
            scheme: SchemeKind::SemiImplicit,
            dt: 0.01,
            courant: chemopattern_core::pde::DEFAULT_COURANT,
            residual_tol: d.residual_tol,
            t_max: d.t_max,
            check_every: d.check_every,
            tracked_modes: Vec::new(),
            n_max: 64,
        }
    }
}

impl SolverSection {
    pub fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeKind::Rk4 => Scheme::Rk4 { courant: self.courant },
            SchemeKind::SemiImplicit => Scheme::SemiImplicit { dt: self.dt },
        }
    }

    pub fn steady_options(&self, tracked_modes: Vec<usize>) -> SteadyOptions {
        SteadyOptions {
            scheme: self.scheme(),
            residual_tol: self.residual_tol,
            t_max: self.t_max,
            check_every: self.check_every,
            tracked_modes,
        }
    }
}

/// Initial data of single simulations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `u = u_c (1 + rel xi)`, `v = v_bar (1 + rel xi')` with seeded noise.
    Random {
        #[serde(default = "default_rel")]
        rel: f64,
    },
    /// `u = u_c + amplitude cos(wavenumber x)`, `v = v_bar + v_amplitude cos(wavenumber x)`.
    Cosine {
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        v_amplitude: f64,
    },
    Uniform,
}

fn default_rel() -> f64 {
    0.01
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Random { rel: default_rel() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySection {
    /// Right end of the sampled `k²` range; defaults to four times the band or `k_c²`.
    pub k_sq_max: Option<f64>,
    pub samples: usize,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection { k_sq_max: None, samples: 801 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandauSection {
    /// Criticality of the cubic coefficient along a range of `mu`.
    pub mu_sweep: Option<Sweep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BifurcationSection {
    pub chi_lo: Option<f64>,
    pub chi_hi: Option<f64>,
    pub samples: usize,
}

impl Default for BifurcationSection {
    fn default() -> Self {
        BifurcationSection { chi_lo: None, chi_hi: None, samples: 401 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    /// Truncation order of the reconstruction, 2 or 4.
    pub order: u32,
    /// Bound on the relative error of the fundamental amplitude.
    pub amplitude_tol: f64,
    /// The sup-norm field error must stay below
    /// `max(sup_tol_rel * amplitude, sup_tol_eps3 * eps³)` when either is set.
    pub sup_tol_rel: Option<f64>,
    pub sup_tol_eps3: Option<f64>,
    pub require_mode_match: bool,
    /// With order 4, also require a smaller amplitude error than the order-2 truncation.
    pub require_better_than_second: bool,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection {
            order: 2,
            amplitude_tol: 0.1,
            sup_tol_rel: None,
            sup_tol_eps3: None,
            require_mode_match: true,
            require_better_than_second: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HysteresisSection {
    /// Initial amplitudes of `u - u_c`; the first is expected to reach a
    /// pattern and the second the uniform state.
    pub amplitudes: [f64; 2],
    pub wavenumber: f64,
    /// A run counts as patterned when `max u - min u` exceeds this.
    pub pattern_ptp: f64,
    /// A run counts as uniform when `max |u - u_c|` is below this.
    pub uniform_sup: f64,
}

impl Default for HysteresisSection {
    fn default() -> Self {
        HysteresisSection { amplitudes: [0.5, 0.1], wavenumber: 2.0, pattern_ptp: 0.1, uniform_sup: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompetitionSection {
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// Starting amplitudes `(A1, A2)` of trajectories and PDE runs.
    pub starts: Vec<[f64; 2]>,
    pub t_max: f64,
    /// Basin map resolution per axis and its upper corner.
    pub basin_n: usize,
    pub basin_max: f64,
    /// Also run the PDE from each start.
    pub simulate: bool,
}

impl Default for CompetitionSection {
    fn default() -> Self {
        CompetitionSection {
            k1: None,
            k2: None,
            starts: Vec::new(),
            t_max: 1e4,
            basin_n: 41,
            basin_max: 0.5,
            simulate: false,
        }
    }
}

/// Target for one reported metric. Every bound that is set must hold.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub value: Option<f64>,
    /// Absolute tolerance around `value`.
    pub abs: Option<f64>,
    /// Relative tolerance around `value`.
    pub rel: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub params: ParamsSection,
    /// Distance above threshold, `chi = chi_c (1 + eps²)`. Exclusive with `params.chi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub mode: ModeSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub landau: LandauSection,
    #[serde(default)]
    pub bifurcation: BifurcationSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub hysteresis: HysteresisSection,
    #[serde(default)]
    pub competition: CompetitionSection,
    #[serde(default)]
    pub expect: BTreeMap<String, Expectation>,
}

fn default_seed() -> u64 {
    1
}

/// A configuration problem tied to a dotted key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn field(path: &str, message: impl Into<String>) -> FieldError {
    FieldError { path: path.to_string(), message: message.into() }
}

/// Sensitivity and expansion parameter after resolving `eps` or `chi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub params: ModelParams,
    pub chi: f64,
    /// Base point for `eps`; absent when it does not exist (`mu = 0` with the
    /// continuous choice).
    pub base: Option<CriticalPoint>,
    /// `chi / chi_base - 1`, negative below threshold.
    pub eps_sq: Option<f64>,
    pub eps: Option<f64>,
}

impl ExperimentConfig {
    /// Checks every cross-field rule and returns all violations.
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errs = Vec::new();
        match (self.eps, self.params.chi) {
            (Some(_), Some(_)) => errs.push(field("eps", "`eps` and `params.chi` are mutually exclusive")),
            (None, None) => errs.push(field("eps", "set exactly one of `eps` and `params.chi`")),
            (Some(e), None) if !(e >= 0.0 && e.is_finite()) => {
                errs.push(field("eps", "must be a non-negative number"))
            }
            _ => {}
        }
        let p = ModelParams {
            d1: self.params.d1,
            d2: self.params.d2,
            chi: self.params.chi.unwrap_or(0.0),
            mu: self.params.mu,
            u_c: self.params.u_c,
            alpha: self.params.alpha,
            beta: self.params.beta,
            domain_length: self.params.domain_length,
        };
        if let Err(e) = p.validate() {
            for v in e.violations {
                errs.push(field(&format!("params.{}", v.field), v.message));
            }
        }
        if self.grid.n_cells < MIN_NODES {
            errs.push(field("grid.n_cells", format!("needs at least {MIN_NODES} nodes")));
        }
        let s = &self.solver;
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(s.dt) {
            errs.push(field("solver.dt", "must be positive"));
        }
        if !positive(s.courant) {
            errs.push(field("solver.courant", "must be positive"));
        }
        if !(s.residual_tol >= 0.0) {
            errs.push(field("solver.residual_tol", "must be non-negative"));
        }
        if !positive(s.t_max) {
            errs.push(field("solver.t_max", "must be positive"));
        }
        if s.n_max == 0 {
            errs.push(field("solver.n_max", "must be at least 1"));
        }
        match &self.initial {
            InitialData::Random { rel } if !(*rel >= 0.0 && *rel < 1.0) => {
                errs.push(field("initial.rel", "must lie in [0, 1)"))
            }
            InitialData::Cosine { amplitude, wavenumber, v_amplitude }
                if !(amplitude.is_finite() && wavenumber.is_finite() && v_amplitude.is_finite()) =>
            {
                errs.push(field("initial", "cosine data must be finite"))
            }
            _ => {}
        }
        if self.stability.samples < 2 {
            errs.push(field("stability.samples", "must be at least 2"));
        }
        if let Some(k) = self.stability.k_sq_max {
            if !positive(k) {
                errs.push(field("stability.k_sq_max", "must be positive"));
            }
        }
        if let Some(sw) = &self.landau.mu_sweep {
            if !(sw.from > 0.0 && sw.to > sw.from && sw.to.is_finite()) {
                errs.push(field("landau.mu_sweep", "needs 0 < from < to"));
            }
            if sw.samples < 2 {
                errs.push(field("landau.mu_sweep.samples", "must be at least 2"));
            }
        }
        if self.bifurcation.samples < 2 {
            errs.push(field("bifurcation.samples", "must be at least 2"));
        }
        if let (Some(lo), Some(hi)) = (self.bifurcation.chi_lo, self.bifurcation.chi_hi) {
            if !(lo >= 0.0 && hi > lo) {
                errs.push(field("bifurcation.chi_hi", "needs 0 <= chi_lo < chi_hi"));
            }
        }
        let c = &self.compare;
        if c.order != 2 && c.order != 4 {
            errs.push(field("compare.order", "must be 2 or 4"));
        }
        if !(c.amplitude_tol >= 0.0) {
            errs.push(field("compare.amplitude_tol", "must be non-negative"));
        }
        let h = &self.hysteresis;
        if !h.amplitudes.iter().all(|a| a.is_finite()) || !h.wavenumber.is_finite() {
            errs.push(field("hysteresis", "amplitudes and wavenumber must be finite"));
        }
        let comp = &self.competition;
        if comp.starts.iter().flatten().any(|a| !(*a >= 0.0 && a.is_finite())) {
            errs.push(field("competition.starts", "amplitudes must be non-negative"));
        }
        if !positive(comp.t_max) {
            errs.push(field("competition.t_max", "must be positive"));
        }
        if comp.basin_n < 2 || !positive(comp.basin_max) {
            errs.push(field("competition.basin_n", "basin map needs basin_n >= 2 and basin_max > 0"));
        }
        for (name, e) in &self.expect {
            if e.value.is_none() && e.min.is_none() && e.max.is_none() {
                errs.push(field(&format!("expect.{name}"), "needs `value`, `min` or `max`"));
            }
            if e.value.is_some() && e.abs.is_none() && e.rel.is_none() {
                errs.push(field(&format!("expect.{name}"), "`value` needs `abs` or `rel`"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Model parameters without the sensitivity.
    pub fn base_params(&self) -> ModelParams {
        let s = &self.params;
        ModelParams {
            d1: s.d1,
            d2: s.d2,
            chi: 0.0,
            mu: s.mu,
            u_c: s.u_c,
            alpha: s.alpha,
            beta: s.beta,
            domain_length: s.domain_length,
        }
    }

    /// Turns `eps` or `params.chi` into a sensitivity.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let p0 = self.base_params();
        let base = CriticalPoint::new(&p0, self.mode.choice).ok();
        let chi = match (self.eps, self.params.chi) {
            (Some(eps), None) => {
                let Some(b) = base else {
                    return Err(CliError::Config(vec![field(
                        "eps",
                        "no finite threshold for these parameters; set `params.chi` or use `mode.choice = \"first-admissible\"`",
                    )]));
                };
                b.chi_c * (1.0 + eps * eps)
            }
            (None, Some(chi)) => chi,
            _ => unreachable!("validated"),
        };
        let eps_sq = match (self.eps, base) {
            (Some(eps), _) => Some(eps * eps),
            (None, Some(b)) => Some(chi / b.chi_c - 1.0),
            (None, None) => None,
        };
        let eps = match self.eps {
            Some(e) => Some(e),
            None => eps_sq.filter(|e2| *e2 >= 0.0).map(f64::sqrt),
        };
        Ok(Resolved { params: p0.with_chi(chi), chi, base, eps_sq, eps })
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        Ok(Grid1D::new(self.grid.n_cells, self.params.domain_length)?)
    }
}

/// Splits `key=value`. The value is read as a TOML value and falls back to a
/// plain string, so `--set mode.choice=continuous` needs no quotes.
pub fn parse_override(s: &str) -> Result<(String, toml::Value), CliError> {
    let Some((key, raw)) = s.split_once('=') else {
        return Err(CliError::Override { arg: s.to_string(), reason: "expected key=value".into() });
    };
    let key = key.trim();
    if key.is_empty() || key.split('.').any(|p| p.is_empty()) {
        return Err(CliError::Override { arg: s.to_string(), reason: "empty key segment".into() });
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((key.to_string(), value))
}

/// Sets a dotted key, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut cur = table;
    let mut walked = String::new();
    for part in parts {
        if !walked.is_empty() {
            walked.push('.');
        }
        walked.push_str(part);
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => {
                return Err(CliError::Override {
                    arg: key.to_string(),
                    reason: format!("`{walked}` is not a table"),
                })
            }
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Where a config came from, for messages and reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "name", rename_all = "kebab-case")]
pub enum ConfigSource {
    File(PathBuf),
    Preset(String),
    Inline,
}

impl fmt::Display for ConfigSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigSource::File(p) => write!(f, "{}", p.display()),
            ConfigSource::Preset(n) => write!(f, "preset {n}"),
            ConfigSource::Inline => f.write_str("inline config"),
        }
    }
}

/// Reads `spec` as a file path, or as a built-in preset name when no such
/// file exists.
pub fn read_source(spec: &str) -> Result<(ConfigSource, String), CliError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        return Ok((ConfigSource::File(path.to_path_buf()), text));
    }
    match presets::get(spec) {
        Some(text) => Ok((ConfigSource::Preset(spec.to_string()), text.to_string())),
        None => Err(CliError::ConfigNotFound(spec.to_string())),
    }
}

/// Parses TOML text, applies the overrides in order and validates the result.
pub fn parse_config(
    source: &ConfigSource,
    text: &str,
    overrides: &[(String, toml::Value)],
) -> Result<ExperimentConfig, CliError> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Toml { source_name: source.to_string(), message: format!("{e}") })?;
    for (k, v) in overrides {
        apply_override(&mut table, k, v.clone())?;
    }
    let cfg = ExperimentConfig::deserialize(toml::Value::Table(table))
        .map_err(|e| CliError::Toml { source_name: source.to_string(), message: format!("{e}") })?;
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

/// [`read_source`] followed by [`parse_config`].
pub fn load(
    spec: &str,
    overrides: &[(String, toml::Value)],
) -> Result<(ConfigSource, ExperimentConfig), CliError> {
    let (source, text) = read_source(spec)?;
    let cfg = parse_config(&source, &text, overrides)?;
    Ok((source, cfg))
}
