//! Command-line front end for `chemopattern-core`: experiment configs with
//! presets, the PDE-versus-asymptotics comparison harness, and CSV, JSON and
//! SVG output.
//!
//! Every command reads an [`ExperimentConfig`], writes its files into an
//! output directory and returns an [`Outcome`] whose `pass` flag drives the
//! exit code.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod report;
pub mod sim;
pub mod svg;

pub use commands::{output_dir, run, run_config, Outcome, OUT_ENV};
pub use config::{ExperimentConfig, Scenario};
pub use error::CliError;
pub use report::{ComparisonReport, SCHEMA, VERSION};
