//! Error type of the front end.

use std::path::PathBuf;

use chemopattern_core::amplitude::AmplitudeError;
use chemopattern_core::competition::CompetitionError;
use chemopattern_core::pde::PdeError;
use chemopattern_core::stability::StabilityError;
use chemopattern_core::ParamError;

use crate::config::FieldError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("no config file or preset named `{0}`")]
    ConfigNotFound(String),
    #[error("{source_name}: {message}")]
    Toml { source_name: String, message: String },
    #[error("invalid config: {}", join(.0))]
    Config(Vec<FieldError>),
    #[error("bad override `{arg}`: {reason}")]
    Override { arg: String, reason: String },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
    #[error(transparent)]
    Competition(#[from] CompetitionError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("{what}: {reason}")]
    Unsupported { what: &'static str, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("worker thread panicked")]
    Worker,
}

fn join(errs: &[FieldError]) -> String {
    errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
