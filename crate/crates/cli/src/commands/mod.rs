//! One module per command. Each returns its result, metrics and intrinsic
//! checks; [`run_config`] adds the `expect` checks and writes the report.

mod bifurcation;
mod compare;
mod competition;
mod hysteresis;
mod landau;
mod simulate;
mod stability;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{self, ConfigSource, ExperimentConfig, Resolved, Scenario};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::report::{expectations, Check, Envelope, Metrics, SCHEMA, VERSION};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "CHEMOPATTERN_OUT";

pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub resolved: &'a Resolved,
    pub out: &'a mut OutputDir,
}

pub struct Finished {
    pub result: serde_json::Value,
    pub metrics: Metrics,
    pub checks: Vec<Check>,
    /// Short human-readable lines for the terminal.
    pub summary: Vec<String>,
}

impl Finished {
    pub fn new<T: Serialize>(result: &T) -> Result<Self, CliError> {
        let result = serde_json::to_value(result)
            .map_err(|e| CliError::Json { path: PathBuf::from("<report>"), source: e })?;
        Ok(Finished { result, metrics: Metrics::new(), checks: Vec::new(), summary: Vec::new() })
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }
}

/// What a finished command reports back to the caller.
#[derive(Debug)]
pub struct Outcome {
    pub scenario: Scenario,
    pub pass: bool,
    pub metrics: Metrics,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
    pub report: PathBuf,
    pub summary: Vec<String>,
}

/// `--out`, then the config's `output`, then the environment, then `out`.
pub fn output_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output {
        return p.clone();
    }
    match std::env::var_os(OUT_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from("out"),
    }
}

/// Loads a config file or preset, applies `key=value` overrides and runs.
pub fn run(
    scenario: Scenario,
    config: &str,
    overrides: &[String],
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let sets = overrides.iter().map(|s| config::parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let (source, cfg) = config::load(config, &sets)?;
    let dir = output_dir(out, &cfg);
    run_config(scenario, &source, &cfg, &dir)
}

pub fn run_config(
    scenario: Scenario,
    source: &ConfigSource,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<Outcome, CliError> {
    let resolved = cfg.resolve()?;
    let mut out = OutputDir::create(dir)?;
    let mut ctx = Context { config: cfg, resolved: &resolved, out: &mut out };
    let mut done = match scenario {
        Scenario::Stability => stability::run(&mut ctx)?,
        Scenario::Landau => landau::run(&mut ctx)?,
        Scenario::Bifurcation => bifurcation::run(&mut ctx)?,
        Scenario::Competition => competition::run(&mut ctx)?,
        Scenario::Simulate => simulate::run(&mut ctx)?,
        Scenario::Compare => compare::run(&mut ctx)?,
        Scenario::Hysteresis => hysteresis::run(&mut ctx)?,
    };
    done.checks.extend(expectations(&cfg.expect, &done.metrics));
    let pass = done.checks.iter().all(|c| c.pass);
    let envelope = Envelope {
        schema: SCHEMA,
        command: scenario,
        version: VERSION,
        seed: cfg.seed,
        source,
        config: cfg,
        resolved: &resolved,
        result: &done.result,
        metrics: &done.metrics,
        checks: &done.checks,
        pass,
    };
    let report_name = format!("{scenario}.json");
    out.json(&report_name, &envelope)?;
    Ok(Outcome {
        scenario,
        pass,
        metrics: done.metrics,
        checks: done.checks,
        files: out.written().to_vec(),
        report: out.root().join(report_name),
        summary: done.summary,
    })
}
