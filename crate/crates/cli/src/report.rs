//! Report envelope, metric checks and the PDE-versus-asymptotics comparison.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::{ConfigSource, Expectation, ExperimentConfig, Resolved, Scenario};

pub const SCHEMA: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Named scalar results of a command, the targets of `expect` entries.
pub type Metrics = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// `value <= limit`.
    AtMost,
    /// `value >= limit`.
    AtLeast,
    /// `value > limit`.
    Above,
    /// `value < limit`.
    Below,
    /// `|value - target| <= limit`.
    Within,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound, limit: f64) -> Self {
        let pass = match bound {
            Bound::AtMost => value <= limit,
            Bound::AtLeast => value >= limit,
            Bound::Above => value > limit,
            Bound::Below => value < limit,
            Bound::Within => unreachable!("use Check::within"),
        };
        Check { name: name.into(), value, bound, limit, target: None, pass }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Bound::Within,
            limit: tol,
            target: Some(target),
            pass: (value - target).abs() <= tol,
        }
    }

    /// A boolean condition recorded as 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check::new(name, if ok { 1.0 } else { 0.0 }, Bound::AtLeast, 1.0)
    }
}

/// Evaluates the config's `expect` table. A missing metric is a failed check
/// with a NaN value.
pub fn expectations(expect: &BTreeMap<String, Expectation>, metrics: &Metrics) -> Vec<Check> {
    let mut out = Vec::new();
    for (name, e) in expect {
        let v = metrics.get(name).copied().unwrap_or(f64::NAN);
        if let Some(target) = e.value {
            if let Some(a) = e.abs {
                out.push(Check::within(name.clone(), v, target, a));
            }
            if let Some(r) = e.rel {
                out.push(Check::within(name.clone(), v, target, r * target.abs()));
            }
        }
        if let Some(m) = e.min {
            out.push(Check::new(name.clone(), v, Bound::AtLeast, m));
        }
        if let Some(m) = e.max {
            out.push(Check::new(name.clone(), v, Bound::AtMost, m));
        }
    }
    out
}

/// Top level of every JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: u32,
    pub command: Scenario,
    pub version: &'static str,
    pub seed: u64,
    pub source: &'a ConfigSource,
    pub config: &'a ExperimentConfig,
    pub resolved: &'a Resolved,
    pub result: &'a T,
    pub metrics: &'a Metrics,
    pub checks: &'a [Check],
    pub pass: bool,
}

/// Wavenumber, with its Neumann index when it is one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeInfo {
    pub k: f64,
    pub n: Option<u32>,
}

impl ModeInfo {
    /// Recognizes `k = n pi / l` up to rounding.
    pub fn from_k(k: f64, l: f64) -> Self {
        let r = k * l / std::f64::consts::PI;
        let n = r.round();
        let n = (n >= 1.0 && (r - n).abs() < 1e-9).then_some(n as u32);
        ModeInfo { k, n }
    }

    pub fn from_n(n: usize, l: f64) -> Self {
        ModeInfo { k: n as f64 * std::f64::consts::PI / l, n: Some(n as u32) }
    }
}

/// Predicted versus measured stationary pattern.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub label: String,
    /// Truncation order of the prediction, when it is an expansion.
    pub order: Option<u32>,
    pub predicted_mode: Option<ModeInfo>,
    pub measured_mode: ModeInfo,
    /// Coefficient of the dominant cosine in `u - u_c`, in absolute value.
    pub predicted_amplitude: f64,
    pub measured_amplitude: f64,
    /// `|measured - predicted| / predicted`; absent when the prediction is zero.
    pub relative_amplitude_error: Option<f64>,
    /// `sqrt((1/l) ∫ (u - u_pred)²)` on the simulation grid.
    pub l2_error: Option<f64>,
    /// `max |u - u_pred|` on the simulation grid.
    pub sup_error: Option<f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ComparisonReport {
    pub fn finish(mut self) -> Self {
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }
}

/// `|a - b| / |b|`, or `None` when `b` is zero.
pub fn relative_error(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| (a - b).abs() / b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_bounds() {
        assert!(Check::new("a", 1.0, Bound::AtMost, 1.0).pass);
        assert!(!Check::new("a", 1.0, Bound::Below, 1.0).pass);
        assert!(Check::new("a", 2.0, Bound::Above, 1.0).pass);
        assert!(!Check::new("a", f64::NAN, Bound::AtLeast, 0.0).pass);
        assert!(Check::within("a", 1.05, 1.0, 0.1).pass);
        assert!(!Check::within("a", 1.2, 1.0, 0.1).pass);
        assert!(!Check::holds("a", false).pass);
    }

    #[test]
    fn expectations_cover_every_bound() {
        let mut expect = BTreeMap::new();
        expect.insert("x".into(), Expectation { value: Some(2.0), rel: Some(0.01), ..Default::default() });
        expect.insert("y".into(), Expectation { min: Some(0.0), max: Some(1.0), ..Default::default() });
        expect.insert("missing".into(), Expectation { min: Some(0.0), ..Default::default() });
        let mut m = Metrics::new();
        m.insert("x".into(), 2.01);
        m.insert("y".into(), 1.5);
        let c = expectations(&expect, &m);
        assert_eq!(c.len(), 4);
        let by = |n: &str| c.iter().filter(|c| c.name == n).map(|c| c.pass).collect::<Vec<_>>();
        assert_eq!(by("x"), vec![true]);
        assert_eq!(by("y"), vec![true, false]);
        assert_eq!(by("missing"), vec![false]);
    }

    #[test]
    fn neumann_index_is_recognized() {
        let l = 2.0 * std::f64::consts::PI;
        assert_eq!(ModeInfo::from_k(3.5, l).n, Some(7));
        assert_eq!(ModeInfo::from_k(3.45, l).n, None);
        assert_eq!(ModeInfo::from_n(8, l).k, 4.0);
    }
}
