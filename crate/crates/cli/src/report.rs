//! Reports, checks and exit status.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use ym_helix::Error;

use crate::config::ExperimentConfig;

/// One pass/fail line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion this check contributes to.
    pub criterion: Option<u8>,
    pub mesh: Option<String>,
    pub pass: bool,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            criterion: None,
            mesh: None,
            pass: value <= limit,
            value: Some(value),
            limit: Some(limit),
            detail: None,
        }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { pass: value >= limit, ..Self::at_most(name, value, limit) }
    }

    pub fn equal<T: PartialEq + std::fmt::Debug>(name: &str, found: T, expected: T) -> Self {
        Self {
            name: name.to_string(),
            criterion: None,
            mesh: None,
            pass: found == expected,
            value: None,
            limit: None,
            detail: Some(format!("found {found:?}, expected {expected:?}")),
        }
    }

    pub fn flag(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), criterion: None, mesh: None, pass, value: None, limit: None, detail: Some(detail.into()) }
    }

    pub fn criterion(mut self, c: u8) -> Self {
        self.criterion = Some(c);
        self
    }

    pub fn on(mut self, mesh: impl ToString) -> Self {
        self.mesh = Some(mesh.to_string());
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    InvariantFailure,
    InputError,
    SolverFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::InvariantFailure => 1,
            Self::InputError => 2,
            Self::SolverFailure => 3,
        }
    }

    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::NotConverged(_) | Error::CapExceeded { .. } | Error::SpectralGap { .. } | Error::Inconsistent(_) => {
                Self::SolverFailure
            }
            _ => Self::InputError,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { status: Status::of_error(&e), message: e.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub status: Status,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
    pub failure: Option<Failure>,
    /// Wall-clock seconds per timed step; only present when requested, since
    /// it is the one part of a report that does not reproduce.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn new(config: ExperimentConfig, checks: Vec<Check>, data: serde_json::Value, failure: Option<Failure>) -> Self {
        let status = match &failure {
            Some(f) => f.status,
            None if checks.iter().all(|c| c.pass) => Status::Pass,
            None => Status::InvariantFailure,
        };
        Self {
            tool: "ym-helix".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            status,
            checks,
            data,
            failure,
            timings: None,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Checks grouped by criterion number.
    pub fn by_criterion(&self) -> BTreeMap<u8, Vec<&Check>> {
        let mut out: BTreeMap<u8, Vec<&Check>> = BTreeMap::new();
        for c in &self.checks {
            if let Some(k) = c.criterion {
                out.entry(k).or_default().push(c);
            }
        }
        out
    }
}
